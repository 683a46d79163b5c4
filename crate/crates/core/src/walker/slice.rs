//! Per-point tensor data for the x⁻-family of Riemannian metrics h(x⁻):
//! everything the residual systems contract, extracted from one bulk jet
//! evaluation. Dots (x⁻-derivatives) come straight out of the jets — x⁻ is
//! an active variable, not a finite-difference direction.

use crate::error::{Error, Result};
use crate::tensor::{is_positive_definite, lu_invert, mat2, sum, sum2, ten3, ten4, vec1, M2, T3, T4, V1};
use crate::walker::WalkerMetric;

pub(crate) struct SliceData {
    pub n: usize,
    pub point: Vec<f64>,
    pub h: M2,
    pub hinv: M2,
    /// dh[k][i][j] = ∂_k h_ij (k spatial)
    pub dh: T3,
    /// d2h[k][l][i][j] = ∂_k ∂_l h_ij
    pub d2h: T4,
    /// ḣ_ij
    pub hdot: M2,
    /// ∂_k ḣ_ij
    pub dhdot: T3,
    /// ḧ_ij
    pub hddot: M2,
    /// ∂_−(h^{ij}) = −h^{ik} ḣ_kl h^{lj}
    pub hdot_up: M2,
    /// Γ^k_ij of h(x⁻) (spatial indices only)
    pub gamma: T3,
    /// ∂_e Γ^a_bc (spatial e)
    pub dgamma: T4,
    /// Γ̇^k_ij = ∂_− Γ^k_ij, assembled analytically
    pub gamma_dot: T3,
    pub a: V1,
    /// da[i][j] = ∂_i A_j
    pub da: M2,
    /// ∂_i ∂_j A_k
    pub d2a: T3,
    pub adot: V1,
    /// dadot[i][j] = ∂_i Ȧ_j
    pub dadot: M2,
    /// F_ij = ∂_i A_j − ∂_j A_i
    pub f: M2,
    /// df[k][i][j] = ∂_k F_ij
    pub df: T3,
    pub h0: f64,
    pub dh0: V1,
    pub d2h0: M2,
    pub h1: f64,
    pub dh1: V1,
    pub d2h1: M2,
    /// Ricci tensor of h(x⁻) at the point
    pub ric: M2,
}

impl SliceData {
    pub fn build(w: &WalkerMetric, point: &[f64]) -> Result<SliceData> {
        let n = w.n();
        debug_assert_eq!(point.len(), n + 1);
        let sj = w.slice_jets(point)?;
        let im = n; // slot of x⁻ among the active variables

        let h = mat2(n, |i, j| sj.h[i][j].value);
        if !is_positive_definite(&h) {
            return Err(Error::Construction(format!(
                "h is not positive definite at {point:?}"
            )));
        }
        let (hinv, _) = lu_invert(&h)?;
        let dh = ten3(n, |k, i, j| sj.h[i][j].grad_at(k));
        let d2h = ten4(n, |k, l, i, j| sj.h[i][j].hess_at(k, l));
        let hdot = mat2(n, |i, j| sj.h[i][j].grad_at(im));
        let dhdot = ten3(n, |k, i, j| sj.h[i][j].hess_at(k, im));
        let hddot = mat2(n, |i, j| sj.h[i][j].hess_at(im, im));
        let hdot_up = mat2(n, |i, j| {
            -sum2(n, |k, l| hinv[i][k] * hdot[k][l] * hinv[l][j])
        });

        let gamma = crate::geometry::christoffel_from(&hinv, &dh);
        let dgamma = crate::geometry::dgamma_from(&hinv, &dh, &d2h);
        // Γ̇ = ½ ∂_−(h^{kl})(∂_i h_lj + ∂_j h_il − ∂_l h_ij)
        //     + ½ h^{kl}(∂_i ḣ_lj + ∂_j ḣ_il − ∂_l ḣ_ij)
        let gamma_dot = ten3(n, |k, i, j| {
            0.5 * sum(n, |l| {
                hdot_up[k][l] * (dh[i][l][j] + dh[j][i][l] - dh[l][i][j])
                    + hinv[k][l] * (dhdot[i][l][j] + dhdot[j][i][l] - dhdot[l][i][j])
            })
        });
        let riem = crate::geometry::riemann_from(&gamma, &dgamma);
        let ric = crate::geometry::ricci_from(&riem);

        let a = vec1(n, |i| sj.a[i].value);
        let da = mat2(n, |i, j| sj.a[j].grad_at(i));
        let d2a = ten3(n, |i, j, k| sj.a[k].hess_at(i, j));
        let adot = vec1(n, |i| sj.a[i].grad_at(im));
        let dadot = mat2(n, |i, j| sj.a[j].hess_at(i, im));
        let f = mat2(n, |i, j| da[i][j] - da[j][i]);
        let df = ten3(n, |k, i, j| d2a[k][i][j] - d2a[k][j][i]);

        let h0 = sj.h0.value;
        let dh0 = vec1(n, |i| sj.h0.grad_at(i));
        let d2h0 = mat2(n, |i, j| sj.h0.hess_at(i, j));
        let h1 = sj.h1.value;
        let dh1 = vec1(n, |i| sj.h1.grad_at(i));
        let d2h1 = mat2(n, |i, j| sj.h1.hess_at(i, j));

        Ok(SliceData {
            n,
            point: point.to_vec(),
            h,
            hinv,
            dh,
            d2h,
            hdot,
            dhdot,
            hddot,
            hdot_up,
            gamma,
            dgamma,
            gamma_dot,
            a,
            da,
            d2a,
            adot,
            dadot,
            f,
            df,
            h0,
            dh0,
            d2h0,
            h1,
            dh1,
            d2h1,
            ric,
        })
    }

    /// Δφ = h^{ij}(∂_i∂_j φ − Γ^k_ij ∂_k φ) from raw derivative arrays.
    pub fn laplacian(&self, d2phi: &M2, dphi: &V1) -> f64 {
        let n = self.n;
        sum2(n, |i, j| {
            self.hinv[i][j] * (d2phi[i][j] - sum(n, |k| self.gamma[k][i][j] * dphi[k]))
        })
    }

    /// ∇^i ω_i = h^{ij}(∂_i ω_j − Γ^k_ij ω_k).
    pub fn divergence(&self, domega: &M2, omega: &V1) -> f64 {
        let n = self.n;
        sum2(n, |i, j| {
            self.hinv[i][j] * (domega[i][j] - sum(n, |k| self.gamma[k][i][j] * omega[k]))
        })
    }

    /// ∇^j t_ij for a symmetric 2-tensor with ∂_k t_ij = dt[k][i][j].
    pub fn divergence_sym2(&self, t: &M2, dt: &T3) -> V1 {
        let n = self.n;
        vec1(n, |i| {
            sum2(n, |j, k| {
                self.hinv[j][k]
                    * (dt[k][i][j]
                        - sum(n, |l| {
                            self.gamma[l][k][i] * t[l][j] + self.gamma[l][k][j] * t[i][l]
                        }))
            })
        })
    }

    /// tr(h⁻¹ ḣ) and its spatial gradient ∂_i (h^{jk} ḣ_jk).
    pub fn trace_hdot(&self) -> (f64, V1) {
        let n = self.n;
        let tr = sum2(n, |j, k| self.hinv[j][k] * self.hdot[j][k]);
        let grad = vec1(n, |i| {
            sum2(n, |j, k| {
                -sum2(n, |m, l| self.hinv[j][m] * self.dh[i][m][l] * self.hinv[l][k])
                    * self.hdot[j][k]
                    + self.hinv[j][k] * self.dhdot[i][j][k]
            })
        });
        (tr, grad)
    }
}
