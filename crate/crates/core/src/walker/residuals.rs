//! The Einstein systems for the Walker ansatz, evaluated verbatim as
//! pointwise residuals.
//!
//! Equation ids follow the usual numbering for this reduction: the general
//! system is eq4.8–eq4.11; the A≡0 system eq8–eq11; the H₀≡0 form
//! eq12–eq15; the parallel-null-vector (Ricci-flat) form eq4.8B/eq4.9B/
//! eq4.11B; the Λ≠0 normal form eq16–eq19; plus the strengthened
//! divergence-free condition eq4.9strong.

use crate::error::{Error, Result};
use crate::geometry;
use crate::tensor::{max_abs, mat2, sum, sum2, ten3, vec1, T3, V1};
use crate::walker::{checked_profile, require_a_zero, ResidualReport, SliceData, WalkerMetric};

/// sup over points and indices of |Ric_ab − Λ g_ab| on the assembled full
/// metric. This is the reference route the reduced systems are checked
/// against.
pub fn einstein_residual(
    w: &WalkerMetric,
    lambda: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    let metric = w.assemble_full();
    let mut sup = 0.0_f64;
    for p in points {
        let fd = geometry::frame_data(&metric, p)?;
        let gamma = geometry::christoffel(&fd);
        let dgamma = geometry::dgamma_from(&fd.g_inv, &fd.dg, &fd.d2g);
        let riem = geometry::riemann_from(&gamma, &dgamma);
        let ric = geometry::ricci_from(&riem);
        let m = p.len();
        for a in 0..m {
            for b in 0..m {
                sup = sup.max((ric[a][b] - lambda * fd.g[a][b]).abs());
            }
        }
    }
    Ok(ResidualReport::new(
        "einstein",
        points.to_vec(),
        sup,
        tol,
    ))
}

/// The scalar/vector/tensor values of the four general equations at one
/// slice point.
pub(crate) struct SystemValues {
    /// ΔH₀ − ½F^{ij}F_ij − 2A^i∂_iH₁ − H₁∇^iA_i + 2ΛA^iA_i − 2∇^iȦ_i
    ///   + ½ḣ^{ij}ḣ_ij + h^{ij}ḧ_ij + ½h^{ij}ḣ_ij·H₁
    pub eq48: f64,
    /// ∇^jF_ij + ∂_iH₁ − 2ΛA_i + ∇^jḣ_ij − ∂_i(h^{jk}ḣ_jk)
    pub eq49: V1,
    /// ΔH₁ − 2Λ∇^iA_i + Λh^{ij}ḣ_ij
    pub eq410: f64,
    /// Ric_ij − Λh_ij
    pub eq411_sup: f64,
    // shared pieces for the reduced systems
    pub lap_h0: f64,
    pub lap_h1: f64,
    pub hdot_sq: f64,
    pub h_hddot: f64,
    pub tr_hdot: f64,
    pub dtr_hdot: V1,
    pub div_hdot: V1,
    pub dh1: V1,
    pub h1_value: f64,
}

pub(crate) fn system_values(d: &SliceData, lambda: f64) -> SystemValues {
    let n = d.n;
    let lap_h0 = d.laplacian(&d.d2h0, &d.dh0);
    let lap_h1 = d.laplacian(&d.d2h1, &d.dh1);
    // F^{ij}F_ij
    let f_up_f = sum2(n, |i, j| {
        sum2(n, |k, l| d.hinv[i][k] * d.hinv[j][l] * d.f[k][l]) * d.f[i][j]
    });
    let a_up = vec1(n, |i| sum(n, |j| d.hinv[i][j] * d.a[j]));
    let a_dh1 = sum(n, |i| a_up[i] * d.dh1[i]);
    let div_a = d.divergence(&d.da, &d.a);
    let a_up_a = sum(n, |i| a_up[i] * d.a[i]);
    let div_adot = d.divergence(&d.dadot, &d.adot);
    // ḣ^{ij}ḣ_ij with ḣ^{ij} = ∂_−(h^{ij})
    let hdot_sq = sum2(n, |i, j| d.hdot_up[i][j] * d.hdot[i][j]);
    let h_hddot = sum2(n, |i, j| d.hinv[i][j] * d.hddot[i][j]);
    let (tr_hdot, dtr_hdot) = d.trace_hdot();
    let div_f = vec1(n, |i| {
        sum2(n, |j, k| {
            d.hinv[j][k]
                * (d.df[k][i][j]
                    - sum(n, |l| d.gamma[l][k][i] * d.f[l][j] + d.gamma[l][k][j] * d.f[i][l]))
        })
    });
    let div_hdot = d.divergence_sym2(&d.hdot, &d.dhdot);

    let eq48 = lap_h0 - 0.5 * f_up_f - 2.0 * a_dh1 - d.h1 * div_a + 2.0 * lambda * a_up_a
        - 2.0 * div_adot
        + 0.5 * hdot_sq
        + h_hddot
        + 0.5 * tr_hdot * d.h1;
    let eq49 = vec1(n, |i| {
        div_f[i] + d.dh1[i] - 2.0 * lambda * d.a[i] + div_hdot[i] - dtr_hdot[i]
    });
    let eq410 = lap_h1 - 2.0 * lambda * div_a + lambda * tr_hdot;
    let eq411_sup = max_abs(
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| d.ric[i][j] - lambda * d.h[i][j]),
    );

    SystemValues {
        eq48,
        eq49,
        eq410,
        eq411_sup,
        lap_h0,
        lap_h1,
        hdot_sq,
        h_hddot,
        tr_hdot,
        dtr_hdot,
        div_hdot,
        dh1: d.dh1.clone(),
        h1_value: d.h1,
    }
}

fn sup_over_points(
    w: &WalkerMetric,
    points: &[Vec<f64>],
    lambda: f64,
    mut pick: impl FnMut(&SystemValues) -> Vec<(&'static str, f64)>,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let mut sups: Vec<(&'static str, f64)> = Vec::new();
    for p in points {
        let data = w.slice_data(p)?;
        let vals = system_values(&data, lambda);
        let contributions = pick(&vals);
        if sups.is_empty() {
            sups = contributions.iter().map(|(id, _)| (*id, 0.0)).collect();
        }
        for (slot, (_, v)) in sups.iter_mut().zip(&contributions) {
            slot.1 = slot.1.max(v.abs());
        }
    }
    Ok(sups
        .into_iter()
        .map(|(id, sup)| ResidualReport::new(id, points.to_vec(), sup, tol))
        .collect())
}

/// Eqs. eq4.8–eq4.11: the Einstein equation for the general Walker form,
/// assuming only the quadratic x⁺-profile of H.
pub fn residuals_general(
    w: &WalkerMetric,
    lambda: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    checked_profile(w, lambda)?;
    sup_over_points(
        w,
        points,
        lambda,
        |v| {
            vec![
                ("eq4.8", v.eq48),
                ("eq4.9", max_abs(v.eq49.iter().copied())),
                ("eq4.10", v.eq410),
                ("eq4.11", v.eq411_sup),
            ]
        },
        tol,
    )
}

/// Eqs. eq8–eq11: the system after A has been transformed away.
pub fn residuals_a0(
    w: &WalkerMetric,
    lambda: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_a_zero(w, "the A=0 system")?;
    checked_profile(w, lambda)?;
    sup_over_points(
        w,
        points,
        lambda,
        |v| {
            vec![
                (
                    "eq8",
                    v.lap_h0 + 0.5 * v.hdot_sq + v.h_hddot + 0.5 * v.tr_hdot * v.h1_value,
                ),
                (
                    "eq9",
                    max_abs(
                        v.dh1
                            .iter()
                            .zip(v.div_hdot.iter().zip(&v.dtr_hdot))
                            .map(|(d1, (dv, dt))| d1 + dv - dt),
                    ),
                ),
                ("eq10", v.lap_h1 + lambda * v.tr_hdot),
                ("eq11", v.eq411_sup),
            ]
        },
        tol,
    )
}

/// Eqs. eq12–eq15: additionally H₀ ≡ 0.
pub fn residuals_theorem2(
    w: &WalkerMetric,
    lambda: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_a_zero(w, "the H0=0 system")?;
    checked_profile(w, lambda)?;
    let (_, _, h0_zero) = w.split_flags().ok_or_else(|| {
        Error::Precondition("metric form is not syntactically profiled".to_string())
    })?;
    if !h0_zero {
        return Err(Error::Precondition(
            "the H0=0 system requires H0 ≡ 0 (syntactic)".to_string(),
        ));
    }
    sup_over_points(
        w,
        points,
        lambda,
        |v| {
            vec![
                (
                    "eq12",
                    0.5 * v.hdot_sq + v.h_hddot + 0.5 * v.tr_hdot * v.h1_value,
                ),
                (
                    "eq13",
                    max_abs(
                        v.dh1
                            .iter()
                            .zip(v.div_hdot.iter().zip(&v.dtr_hdot))
                            .map(|(d1, (dv, dt))| d1 + dv - dt),
                    ),
                ),
                ("eq14", v.lap_h1 + lambda * v.tr_hdot),
                ("eq15", v.eq411_sup),
            ]
        },
        tol,
    )
}

/// Eqs. eq4.8B/eq4.9B/eq4.11B: the Ricci-flat parallel-null-vector form
/// (A ≡ 0, H independent of x⁺, in coordinates where H vanishes).
pub fn residuals_ricciflat(
    w: &WalkerMetric,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_a_zero(w, "the Ricci-flat system")?;
    let (lambda, h1_zero, _) = w.profile_flags().ok_or_else(|| {
        Error::Precondition("metric form is not syntactically profiled".to_string())
    })?;
    if lambda != 0.0 || !h1_zero {
        return Err(Error::Precondition(
            "the Ricci-flat system requires H independent of x+ (syntactic)".to_string(),
        ));
    }
    sup_over_points(
        w,
        points,
        0.0,
        |v| {
            vec![
                ("eq4.8B", 0.5 * v.hdot_sq + v.h_hddot),
                (
                    "eq4.9B",
                    max_abs(v.div_hdot.iter().zip(&v.dtr_hdot).map(|(a, b)| a - b)),
                ),
                ("eq4.11B", v.eq411_sup),
            ]
        },
        tol,
    )
}

/// Eqs. eq16–eq19: the Λ≠0 normal form (A ≡ 0, H₁ ≡ 0).
pub fn residuals_main(
    w: &WalkerMetric,
    lambda: f64,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    require_a_zero(w, "the normal-form system")?;
    checked_profile(w, lambda)?;
    let (_, h1_zero, _) = w.split_flags().ok_or_else(|| {
        Error::Precondition("metric form is not syntactically profiled".to_string())
    })?;
    if !h1_zero {
        return Err(Error::Precondition(
            "the normal-form system requires H1 ≡ 0 (syntactic)".to_string(),
        ));
    }
    sup_over_points(
        w,
        points,
        lambda,
        |v| {
            vec![
                ("eq16", v.lap_h0 + 0.5 * v.h_hddot),
                ("eq17", max_abs(v.div_hdot.iter().copied())),
                ("eq18", v.tr_hdot),
                ("eq19", v.eq411_sup),
            ]
        },
        tol,
    )
}

/// The strengthened condition ∇_i(h^{kt}ḣ_tj) − 2Γ̇^k_ij = 0, as a rank-3
/// residual.
pub fn residual_strong(
    w: &WalkerMetric,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    require_a_zero(w, "the strengthened divergence condition")?;
    let mut sup = 0.0_f64;
    for p in points {
        let d = w.slice_data(p)?;
        let s = strong_tensor(&d);
        sup = sup.max(max_abs(s.iter().flatten().flatten().copied()));
    }
    Ok(ResidualReport::new(
        "eq4.9strong",
        points.to_vec(),
        sup,
        tol,
    ))
}

/// S^k_ij = ∇_i M^k_j − 2Γ̇^k_ij with M = h⁻¹ḣ; layout s[k][i][j].
pub(crate) fn strong_tensor(d: &SliceData) -> T3 {
    let n = d.n;
    let m = mat2(n, |k, j| sum(n, |t| d.hinv[k][t] * d.hdot[t][j]));
    // ∂_i M^k_j = ∂_i(h^{kt}) ḣ_tj + h^{kt} ∂_i ḣ_tj
    let dm = ten3(n, |i, k, j| {
        sum(n, |t| {
            -sum2(n, |p, q| d.hinv[k][p] * d.dh[i][p][q] * d.hinv[q][t]) * d.hdot[t][j]
                + d.hinv[k][t] * d.dhdot[i][t][j]
        })
    });
    ten3(n, |k, i, j| {
        dm[i][k][j]
            + sum(n, |l| d.gamma[k][i][l] * m[l][j] - d.gamma[l][i][j] * m[k][l])
            - 2.0 * d.gamma_dot[k][i][j]
    })
}

/// Trace of the strengthened condition over (k = i): equals
/// ∇^t ḣ_tj − ∂_j(h^{kl}ḣ_kl) identically.
pub fn strong_trace(w: &WalkerMetric, point: &[f64]) -> Result<V1> {
    let d = w.slice_data(point)?;
    let s = strong_tensor(&d);
    let n = d.n;
    Ok(vec1(n, |j| sum(n, |i| s[i][i][j])))
}
