//! Frame decomposition of the curvature tensor of a Walker metric.
//!
//! In the null frame p = ∂₊, X_i = ∂_i − A_i∂₊, q = ∂₋ − ½H∂₊ the
//! curvature operator of a metric with a parallel null line splits into a
//! scalar λ, a vector v in the screen space E = span(X_i), a Riemannian
//! curvature tensor R₀ on E, a map P from E into so(E), and a symmetric T:
//!
//! ```text
//! R(p,q) = (λ, 0, v)          R(x,y) = (0, R₀(x,y), P(y)x − P(x)y)
//! R(x,q) = (g(v,x), P(x), T(x))    R(p,x) = 0
//! ```
//!
//! where (a, A, X) acts by p ↦ a·p, X_j ↦ g(X, X_j)·p + A(X_j),
//! q ↦ −X − a·q. The Ricci reconstruction
//!
//! ```text
//! Ric(p,q) = −λ    Ric(x,y) = Ric(R₀)(x,y)
//! Ric(x,q) = g(x, Ric̃(P) − v)    Ric(q,q) = tr T
//! ```
//!
//! is checked against the directly computed Ricci at every call; a mismatch
//! means a convention bug and is an error, not a warning.

use crate::error::{Error, Result};
use crate::geometry;
use crate::tensor::{lu_invert, mat2, sum, sum2, ten3, ten4, vec1, M2, T3, T4, V1};
use crate::walker::WalkerMetric;

pub struct CurvatureDecomposition {
    pub lambda: f64,
    /// v components in the X_i frame.
    pub v: V1,
    /// r0[a][b][c][d]: E-component a of R(X_c, X_d) X_b.
    pub r0: T4,
    /// p_map[i][a][b]: the so(E) matrix P(X_i)^a_b.
    pub p_map: T3,
    /// t[i][j] = g(T(X_i), X_j), symmetric.
    pub t: M2,
    /// Gram matrix of the frame: g(X_i, X_j) = h_ij at the point.
    pub gram: M2,
    /// Largest deviation in the Ricci reconstruction identities.
    pub reconstruction_residual: f64,
}

/// Decompose the curvature at one full point. `basis` optionally replaces
/// the screen frame by X'_i = Σ_j basis[j][i] X_j.
pub fn curvature_decomposition(
    w: &WalkerMetric,
    lambda_expected: f64,
    point: &[f64],
    basis: Option<&M2>,
) -> Result<CurvatureDecomposition> {
    let n = w.n();
    let m = n + 2;
    debug_assert_eq!(point.len(), m);

    let metric = w.assemble_full();
    let fd = geometry::frame_data(&metric, point)?;
    let gamma = geometry::christoffel(&fd);
    let dgamma = geometry::dgamma_from(&fd.g_inv, &fd.dg, &fd.d2g);
    let riem = geometry::riemann_from(&gamma, &dgamma);
    let ric = geometry::ricci_from(&riem);

    let a_vals = vec1(n, |i| fd.g[1 + i][m - 1]);
    let h_cap = fd.g[m - 1][m - 1];

    // frame vectors in coordinates
    let mut p = vec![0.0; m];
    p[0] = 1.0;
    let ident = mat2(n, |i, j| if i == j { 1.0 } else { 0.0 });
    let basis = basis.unwrap_or(&ident);
    let xs: Vec<V1> = (0..n)
        .map(|i| {
            let mut x = vec![0.0; m];
            for j in 0..n {
                x[1 + j] = basis[j][i];
                x[0] -= basis[j][i] * a_vals[j];
            }
            x
        })
        .collect();
    let mut q = vec![0.0; m];
    q[m - 1] = 1.0;
    q[0] = -0.5 * h_cap;

    let gram = mat2(n, |i, j| {
        sum2(n, |k, l| basis[k][i] * fd.g[1 + k][1 + l] * basis[l][j])
    });
    let (gram_inv, _) = lu_invert(&gram)?;
    let (basis_inv, _) = lu_invert(basis)?;

    // curvature operator: [R(U,V)Z]^a = R^a_bcd Z^b V^c U^d, the contraction
    // pattern under which tr(Z ↦ R(X,Z)Y) reproduces Ric(X,Y)
    let op = |u: &V1, v: &V1, z: &V1| -> V1 {
        vec1(m, |a| {
            let mut acc = 0.0;
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        acc += riem[a][b][c][d] * z[b] * v[c] * u[d];
                    }
                }
            }
            acc
        })
    };

    // decompose a coordinate vector into (alpha: p, beta: X_i, gamma_q: q)
    let frame_components = |y: &V1| -> (f64, V1, f64) {
        let gamma_q = y[m - 1];
        let beta_coords = vec1(n, |j| y[1 + j]);
        let beta = vec1(n, |i| sum(n, |j| basis_inv[i][j] * beta_coords[j]));
        let alpha = y[0]
            + sum(n, |j| a_vals[j] * beta_coords[j])
            + 0.5 * h_cap * gamma_q;
        (alpha, beta, gamma_q)
    };

    // λ and v from R(p,q)
    let rpq_p = op(&p, &q, &p);
    let (lambda, _, _) = frame_components(&rpq_p);
    let rpq_q = op(&p, &q, &q);
    let (_, beta, _) = frame_components(&rpq_q);
    let v: V1 = beta.iter().map(|b| -b).collect();

    // R0 from R(X_c, X_d) X_b
    let r0 = ten4(n, |a, b, c, d| {
        let r = op(&xs[c], &xs[d], &xs[b]);
        frame_components(&r).1[a]
    });

    // P and T from R(X_i, q)
    let p_map = ten3(n, |i, a, b| {
        let r = op(&xs[i], &q, &xs[b]);
        frame_components(&r).1[a]
    });
    let t = {
        let t_vec: Vec<V1> = (0..n)
            .map(|i| {
                let r = op(&xs[i], &q, &q);
                frame_components(&r).1.iter().map(|x| -x).collect()
            })
            .collect();
        mat2(n, |i, j| sum(n, |a| t_vec[i][a] * gram[a][j]))
    };

    // reconstruction against the direct Ricci
    let ric_of = |u: &V1, w2: &V1| sum2(m, |a, b| ric[a][b] * u[a] * w2[b]);
    let mut resid = (ric_of(&p, &q) + lambda).abs();
    resid = resid.max(ric_of(&p, &p).abs());
    for i in 0..n {
        let mut x = vec![0.0; m];
        for (slot, val) in xs[i].iter().enumerate() {
            x[slot] = *val;
        }
        resid = resid.max(ric_of(&p, &x).abs());
    }
    // Ric(x,y) = Ric(R0)(x,y) with the E-trace of R0
    let ric_r0 = mat2(n, |a, b| sum(n, |c| r0[c][a][b][c]));
    for a in 0..n {
        for b in 0..n {
            resid = resid.max((ric_of(&xs[a], &xs[b]) - ric_r0[b][a]).abs());
        }
    }
    // Ric(x,q) = g(x, Ric̃(P) − v)
    let tric_v = tric_from(&p_map, &gram_inv, n);
    for i in 0..n {
        let want = sum(n, |j| gram[i][j] * (tric_v[j] - v[j]));
        resid = resid.max((ric_of(&xs[i], &q) - want).abs());
    }
    // Ric(q,q) = tr T
    let tr_t = sum2(n, |i, j| gram_inv[i][j] * t[i][j]);
    resid = resid.max((ric_of(&q, &q) - tr_t).abs());

    if resid > 1e-8 {
        return Err(Error::DecompositionMismatch(resid));
    }
    let _ = lambda_expected;

    Ok(CurvatureDecomposition {
        lambda,
        v,
        r0,
        p_map,
        t,
        gram,
        reconstruction_residual: resid,
    })
}

fn tric_from(p_map: &T3, gram_inv: &M2, n: usize) -> V1 {
    vec1(n, |j| sum2(n, |i, k| gram_inv[i][k] * p_map[i][j][k]))
}

/// Ric̃(P) = P^j_ik g^{ik} X_j, the trace of the P-part against the screen
/// metric. Basis-independent.
pub fn tric(decomp: &CurvatureDecomposition, gram: &M2) -> Result<V1> {
    let n = gram.len();
    let (gram_inv, _) = lu_invert(gram)?;
    Ok(tric_from(&decomp.p_map, &gram_inv, n))
}
