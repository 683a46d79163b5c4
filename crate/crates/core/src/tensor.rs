//! Small dense tensor helpers over dynamic (but tiny) dimensions, plus the
//! linear solves used everywhere: LU with partial pivoting over f64 and
//! Gaussian elimination over the jet ring.

use crate::error::{Error, Result};
use crate::jets::Jet2;

pub type V1 = Vec<f64>;
pub type M2 = Vec<Vec<f64>>;
pub type T3 = Vec<Vec<Vec<f64>>>;
pub type T4 = Vec<Vec<Vec<Vec<f64>>>>;

pub fn vec1(n: usize, mut f: impl FnMut(usize) -> f64) -> V1 {
    (0..n).map(&mut f).collect()
}

pub fn mat2(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> M2 {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

pub fn ten3(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> T3 {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| f(i, j, k)).collect())
                .collect()
        })
        .collect()
}

pub fn ten4(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> T4 {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| (0..n).map(|l| f(i, j, k, l)).collect())
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn sum(n: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
    (0..n).map(&mut f).sum()
}

pub fn sum2(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += f(i, j);
        }
    }
    acc
}

pub fn sum3(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                acc += f(i, j, k);
            }
        }
    }
    acc
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Inverse by LU with partial pivoting. Also returns a cheap condition
/// estimate `‖A‖∞ · ‖A⁻¹‖∞`.
pub fn lu_invert(a: &M2) -> Result<(M2, f64)> {
    let n = a.len();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, lu[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot == 0.0 {
            return Err(Error::SingularMetric { point: Vec::new() });
        }
        lu.swap(col, pivot_row);
        perm.swap(col, pivot_row);
        for r in col + 1..n {
            let factor = lu[r][col] / lu[col][col];
            lu[r][col] = factor;
            for c in col + 1..n {
                lu[r][c] -= factor * lu[col][c];
            }
        }
    }
    // back-substitute each unit vector
    let mut inv = mat2(n, |_, _| 0.0);
    for k in 0..n {
        let mut x = vec![0.0; n];
        for (r, &p) in perm.iter().enumerate() {
            x[r] = if p == k { 1.0 } else { 0.0 };
        }
        for r in 1..n {
            for c in 0..r {
                x[r] -= lu[r][c] * x[c];
            }
        }
        for r in (0..n).rev() {
            for c in r + 1..n {
                x[r] -= lu[r][c] * x[c];
            }
            x[r] /= lu[r][r];
        }
        for r in 0..n {
            inv[r][k] = x[r];
        }
    }
    let row_norm = |m: &M2| {
        m.iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    let cond = row_norm(a) * row_norm(&inv);
    Ok((inv, cond))
}

/// Matrix inverse over the jet ring, by Gaussian elimination with pivoting
/// on the value parts. Dimensions here are 2 or 3, so no refinements.
pub fn jet_mat_invert(a: &[Vec<Jet2>]) -> Result<Vec<Vec<Jet2>>> {
    let n = a.len();
    let dim = a[0][0].dim();
    let mut work: Vec<Vec<Jet2>> = a.to_vec();
    let mut inv: Vec<Vec<Jet2>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet2::constant(dim, if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| work[r1][col].value.abs().total_cmp(&work[r2][col].value.abs()))
            .unwrap();
        if work[pivot_row][col].value == 0.0 {
            return Err(Error::SingularMetric { point: Vec::new() });
        }
        work.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = work[col][col].clone();
        for c in 0..n {
            work[col][c] = work[col][c].try_div(&pivot).map_err(Error::Jet)?;
            inv[col][c] = inv[col][c].try_div(&pivot).map_err(Error::Jet)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = work[r][col].clone();
            for c in 0..n {
                work[r][c] = &work[r][c] - &(&factor * &work[col][c]);
                inv[r][c] = &inv[r][c] - &(&factor * &inv[col][c]);
            }
        }
    }
    Ok(inv)
}

/// Cholesky success/failure as a positive-definiteness check.
pub fn is_positive_definite(a: &M2) -> bool {
    let n = a.len();
    let mut l = mat2(n, |_, _| 0.0);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_inverts_minkowski_block() {
        let g = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let (inv, _) = lu_invert(&g).unwrap();
        assert_eq!(inv, g);
    }

    #[test]
    fn lu_inverse_identity_check() {
        let a = vec![
            vec![2.0, 1.0, 0.3],
            vec![1.0, 3.0, -0.2],
            vec![0.3, -0.2, 1.5],
        ];
        let (inv, cond) = lu_invert(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v = sum(3, |k| a[i][k] * inv[k][j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
        assert!(cond < 100.0);
    }

    #[test]
    fn jet_inverse_carries_derivatives() {
        // invert [[1+u, 0],[0, 1]] : (1+u)^{-1} has grad -(1+u)^{-2}
        let u = Jet2::variable(1, 0, 0.5).unwrap();
        let one = Jet2::constant(1, 1.0);
        let zero = Jet2::constant(1, 0.0);
        let a = vec![
            vec![&one + &u, zero.clone()],
            vec![zero.clone(), one.clone()],
        ];
        let inv = jet_mat_invert(&a).unwrap();
        assert!((inv[0][0].value - 1.0 / 1.5).abs() < 1e-14);
        assert!((inv[0][0].grad_at(0) + 1.0 / (1.5 * 1.5)).abs() < 1e-14);
        assert!((inv[1][1].value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_detects_signature() {
        assert!(is_positive_definite(&vec![
            vec![2.0, 0.5],
            vec![0.5, 1.0]
        ]));
        assert!(!is_positive_definite(&vec![
            vec![0.0, 1.0],
            vec![1.0, 0.0]
        ]));
    }
}
