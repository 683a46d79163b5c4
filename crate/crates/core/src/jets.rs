//! Second-order multivariate forward-mode jets.
//!
//! A [`Jet2`] carries a value, its gradient and its (symmetric) Hessian with
//! respect to a fixed set of active variables, and propagates all three
//! exactly through arithmetic and the elementary functions. It is the number
//! type every metric component and scalar field in this crate is evaluated
//! over: curvature needs second derivatives of the metric, and those come out
//! of the jets rather than finite differences.
//!
//! The Hessian is stored as the upper triangle, so symmetry is exact by
//! construction. Dimensions are small (a handful of coordinates), hence dense
//! storage throughout.

use crate::error::JetError;

/// Value, gradient and Hessian of a scalar quantity in `dim` active variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    dim: usize,
    pub value: f64,
    grad: Vec<f64>,
    /// Upper triangle, row-major: entry (i,j) with i <= j lives at
    /// `i*dim - i*(i+1)/2 + j`.
    hess: Vec<f64>,
}

#[inline]
fn tri_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

#[inline]
fn tri_idx(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl Jet2 {
    /// A constant: zero gradient and Hessian.
    pub fn constant(dim: usize, value: f64) -> Self {
        Jet2 {
            dim,
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; tri_len(dim)],
        }
    }

    /// Seed a coordinate variable: unit gradient in slot `index`, zero Hessian.
    pub fn variable(dim: usize, index: usize, value: f64) -> Result<Self, JetError> {
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut j = Jet2::constant(dim, value);
        j.grad[index] = 1.0;
        Ok(j)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    pub fn grad_at(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[tri_idx(self.dim, i, j)]
    }

    /// Full Hessian as a dense symmetric matrix.
    pub fn hess_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.hess_at(i, j)).collect())
            .collect()
    }

    fn check_dims(&self, rhs: &Jet2) -> usize {
        debug_assert_eq!(
            self.dim, rhs.dim,
            "jet dimension mismatch: {} vs {}",
            self.dim, rhs.dim
        );
        self.dim
    }

    pub fn add(&self, rhs: &Jet2) -> Jet2 {
        self.check_dims(rhs);
        Jet2 {
            dim: self.dim,
            value: self.value + rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet2) -> Jet2 {
        self.check_dims(rhs);
        Jet2 {
            dim: self.dim,
            value: self.value - rhs.value,
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| a - b).collect(),
        }
    }

    /// Product rule through second order:
    /// (ab)'' = a''b + a'⊗b' + b'⊗a' + ab''.
    pub fn mul(&self, rhs: &Jet2) -> Jet2 {
        let dim = self.check_dims(rhs);
        let value = self.value * rhs.value;
        let grad: Vec<f64> = (0..dim)
            .map(|i| self.grad[i] * rhs.value + self.value * rhs.grad[i])
            .collect();
        let mut hess = vec![0.0; tri_len(dim)];
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                hess[k] = self.hess[k] * rhs.value
                    + self.grad[i] * rhs.grad[j]
                    + self.grad[j] * rhs.grad[i]
                    + self.value * rhs.hess[k];
                k += 1;
            }
        }
        Jet2 {
            dim,
            value,
            grad,
            hess,
        }
    }

    pub fn neg(&self) -> Jet2 {
        Jet2 {
            dim: self.dim,
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
            hess: self.hess.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        Jet2 {
            dim: self.dim,
            value: c * self.value,
            grad: self.grad.iter().map(|a| c * a).collect(),
            hess: self.hess.iter().map(|a| c * a).collect(),
        }
    }

    /// Chain rule through second order for a scalar function with value `f0`,
    /// first derivative `f1`, second derivative `f2` at `self.value`:
    /// f(a)'' = f2 · a'⊗a' + f1 · a''.
    fn unary_chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let dim = self.dim;
        let grad: Vec<f64> = self.grad.iter().map(|a| f1 * a).collect();
        let mut hess = vec![0.0; tri_len(dim)];
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                hess[k] = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[k];
                k += 1;
            }
        }
        Jet2 {
            dim,
            value: f0,
            grad,
            hess,
        }
    }

    pub fn try_div(&self, rhs: &Jet2) -> Result<Jet2, JetError> {
        self.check_dims(rhs);
        if rhs.value == 0.0 {
            return Err(JetError::DivByZero);
        }
        let inv = rhs.unary_chain(
            1.0 / rhs.value,
            -1.0 / (rhs.value * rhs.value),
            2.0 / (rhs.value * rhs.value * rhs.value),
        );
        Ok(self.mul(&inv))
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.unary_chain(e, e, e)
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.unary_chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value.sin_cos();
        self.unary_chain(c, -s, -c)
    }

    pub fn try_ln(&self) -> Result<Jet2, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain {
                func: "ln",
                value: self.value,
            });
        }
        Ok(self.unary_chain(
            self.value.ln(),
            1.0 / self.value,
            -1.0 / (self.value * self.value),
        ))
    }

    pub fn try_sqrt(&self) -> Result<Jet2, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::Domain {
                func: "sqrt",
                value: self.value,
            });
        }
        let r = self.value.sqrt();
        Ok(self.unary_chain(r, 0.5 / r, -0.25 / (r * self.value)))
    }

    /// Integer power; valid for any base except 0 with a negative exponent.
    pub fn powi(&self, k: i32) -> Result<Jet2, JetError> {
        if k < 0 && self.value == 0.0 {
            return Err(JetError::DivByZero);
        }
        let f0 = self.value.powi(k);
        let f1 = f64::from(k) * self.value.powi(k - 1);
        let f2 = f64::from(k) * f64::from(k - 1) * self.value.powi(k - 2);
        Ok(self.unary_chain(f0, f1, f2))
    }

    /// Power with a constant real exponent. Integer exponents take the
    /// `powi` route (valid for negative bases); otherwise the base must be
    /// positive.
    /// Re-express this jet in a larger ambient space: old active slot `i`
    /// becomes new slot `slot_map[i]`; all other new directions are inert.
    pub fn embed(&self, new_dim: usize, slot_map: &[usize]) -> Jet2 {
        debug_assert_eq!(slot_map.len(), self.dim);
        let mut out = Jet2::constant(new_dim, self.value);
        for (i, &si) in slot_map.iter().enumerate() {
            out.grad[si] = self.grad[i];
            for (j, &sj) in slot_map.iter().enumerate().skip(i) {
                out.hess[tri_idx(new_dim, si, sj)] = self.hess[tri_idx(self.dim, i, j)];
            }
        }
        out
    }

    /// Replace the Hessian wholesale (used where second derivatives come
    /// from a different source than the jet algebra, e.g. differenced
    /// gradients of a flow map).
    pub fn with_hess_matrix(&self, hess: &[Vec<f64>]) -> Jet2 {
        let mut out = self.clone();
        let mut k = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                out.hess[k] = 0.5 * (hess[i][j] + hess[j][i]);
                k += 1;
            }
        }
        out
    }

    pub fn pow_const(&self, c: f64) -> Result<Jet2, JetError> {
        if c == 0.0 {
            return Ok(Jet2::constant(self.dim, 1.0));
        }
        if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
            return self.powi(c as i32);
        }
        if self.value <= 0.0 {
            return Err(JetError::Domain {
                func: "pow",
                value: self.value,
            });
        }
        let f0 = self.value.powf(c);
        let f1 = c * self.value.powf(c - 1.0);
        let f2 = c * (c - 1.0) * self.value.powf(c - 2.0);
        Ok(self.unary_chain(f0, f1, f2))
    }
}

impl std::ops::Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        Jet2::add(self, rhs)
    }
}

impl std::ops::Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        Jet2::sub(self, rhs)
    }
}

impl std::ops::Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        Jet2::mul(self, rhs)
    }
}

impl std::ops::Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::neg(self)
    }
}
