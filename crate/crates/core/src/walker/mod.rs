//! The Walker metric model: the block-form Lorentzian metric
//!
//! ```text
//! g = 2 dx⁺dx⁻ + h_ij dx^i dx^j + 2 A_i dx^i dx⁻ + H (dx⁻)²
//! ```
//!
//! in coordinates (x⁺, x¹..xⁿ, x⁻), with h and A free of x⁺. This module
//! owns the data model, the assembled full metric with its inverse blocks,
//! extraction of the quadratic x⁺-profile of H, the residual systems, and
//! the frame decomposition of the curvature tensor.

mod decomp;
mod residuals;
mod slice;

pub use decomp::{curvature_decomposition, tric, CurvatureDecomposition};
pub use residuals::{
    einstein_residual, residual_strong, residuals_a0, residuals_general, residuals_main,
    residuals_ricciflat, residuals_theorem2, strong_trace,
};
pub(crate) use slice::SliceData;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::field::{eval_at_point, ExprField, Field, FnField};
use crate::geometry::MetricField;
use crate::jets::Jet2;
use crate::sampling::BoxDomain;
use crate::tensor::{lu_invert, mat2, sum, vec1, V1};

/// Default tolerance for jet-exact residuals.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Tolerance used when validating the quadratic x⁺-profile of H.
pub const PROFILE_TOL: f64 = 1e-9;

pub const XP: &str = "xp";
pub const XM: &str = "xm";

/// How H is represented.
#[derive(Clone)]
pub enum HRep {
    /// A single field in (x⁺, x¹..xⁿ, x⁻); may fail the profile check.
    Raw(Field),
    /// H = lambda·(x⁺)² + x⁺·H1 + H0 with H1, H0 fields in (x¹..xⁿ, x⁻).
    Profile {
        lambda: f64,
        h1: Field,
        h0: Field,
        h1_zero: bool,
        h0_zero: bool,
    },
}

/// Bulk evaluator interface for transform-produced metrics: one call per
/// point yields every Walker component with derivatives.
pub(crate) trait WalkerBulk: Send + Sync {
    fn n(&self) -> usize;
    /// (lambda, h1_zero, h0_zero) of the structural profile.
    fn profile_flags(&self) -> (f64, bool, bool);
    /// Component jets at a (x¹..xⁿ, x⁻) point, all n+1 coordinates active.
    fn slice_point(&self, point: &[f64]) -> Result<SliceJets>;
}

/// Walker component jets at one slice point.
pub struct SliceJets {
    pub h: Vec<Vec<Jet2>>,
    pub a: Vec<Jet2>,
    pub h0: Jet2,
    pub h1: Jet2,
}

#[derive(Clone)]
pub(crate) enum Body {
    Fields {
        /// Upper triangle of h, row-major (i <= j), arity n+1.
        h: Vec<Field>,
        a: Vec<Field>,
        h_rep: HRep,
        /// Expression sources where available (needed by transforms that
        /// must differentiate components symbolically).
        exprs: Option<WalkerExprs>,
    },
    Bulk(Arc<dyn WalkerBulk>),
}

/// The expression-level view of a metric (kept alongside the compiled
/// fields so flows can take exact extra derivatives).
#[derive(Clone)]
pub struct WalkerExprs {
    pub h: Vec<Expr>,
    pub a: Vec<Expr>,
    pub h1: Expr,
    pub h0: Expr,
    pub lambda_profile: f64,
    pub h_mentions_xp: bool,
    pub params: Vec<(String, f64)>,
}

/// The metric data (n, h, A, H) plus its declared sample box.
#[derive(Clone)]
pub struct WalkerMetric {
    n: usize,
    coord_names: Vec<String>,
    domain: BoxDomain,
    lambda: Option<f64>,
    a_zero: bool,
    pub(crate) body: Body,
}

fn tri(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl WalkerMetric {
    /// Build from parsed expressions. `h_upper` is the upper triangle of h
    /// row-major (h_11, h_12, .., h_1n, h_22, ..); `h_cap` is H over
    /// (xp, x¹..xⁿ, xm).
    pub fn from_exprs(
        coord_names: &[&str],
        h_upper: &[Expr],
        a: &[Expr],
        h_cap: &Expr,
        lambda: Option<f64>,
        domain: BoxDomain,
        params: &[(String, f64)],
    ) -> Result<WalkerMetric> {
        let n = coord_names.len();
        if n < 2 {
            return Err(Error::Construction(format!(
                "Walker metrics need n >= 2 spatial coordinates, got {n}"
            )));
        }
        if h_upper.len() != n * (n + 1) / 2 || a.len() != n {
            return Err(Error::Construction(
                "component counts do not match n".to_string(),
            ));
        }
        if domain.dim() != n + 2 {
            return Err(Error::Construction(format!(
                "box must cover (xp, {} spatial, xm) = {} coordinates",
                n,
                n + 2
            )));
        }
        let mut names: Vec<String> = coord_names.iter().map(|s| s.to_string()).collect();
        {
            let mut seen = names.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != n || names.iter().any(|s| s == XP || s == XM) {
                return Err(Error::Construction(
                    "spatial coordinate names must be unique and distinct from xp/xm".to_string(),
                ));
            }
        }
        // h and A must not reference x+
        let param_names: Vec<&String> = params.iter().map(|(k, _)| k).collect();
        for (what, e) in h_upper
            .iter()
            .map(|e| ("h", e))
            .chain(a.iter().map(|e| ("A", e)))
        {
            let vars = e.free_vars();
            if vars.contains(XP) {
                return Err(Error::Construction(format!(
                    "{what} component references xp: {}",
                    e.print()
                )));
            }
            for v in &vars {
                if !names.contains(v) && v != XM && !param_names.iter().any(|p| *p == v) {
                    return Err(Error::Construction(format!(
                        "{what} component references unknown name '{v}'"
                    )));
                }
            }
        }
        names.push(XM.to_string());
        let slice_vars = names.clone();
        let mut full_vars = vec![XP.to_string()];
        full_vars.extend(slice_vars.iter().cloned());

        let h_fields: Vec<Field> = h_upper
            .iter()
            .map(|e| ExprField::shared(e.clone(), &slice_vars, params))
            .collect();
        let a_fields: Vec<Field> = a
            .iter()
            .map(|e| ExprField::shared(e.clone(), &slice_vars, params))
            .collect();
        let h_rep = HRep::Raw(ExprField::shared(h_cap.clone(), &full_vars, params));

        // the expression view: collect H as a polynomial in xp where that
        // is syntactically possible (coefficients free of xp)
        let (lambda_profile, h1_expr, h0_expr) = match xp_poly(h_cap) {
            Some([c0, c1, c2]) => {
                // the quadratic coefficient must be a constant for the
                // profile form; parameters count as constants
                let lam = if c2.free_vars().iter().all(|v| {
                    params.iter().any(|(p, _)| p == v)
                }) {
                    let env = crate::exprlang::Env::new(&[], vec![]).with_params(params);
                    c2.eval(&env).map(|j| j.value).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                };
                (lam, c1, c0)
            }
            None => (
                f64::NAN,
                Expr::num(f64::NAN),
                h_cap.substitute(XP, 0.0).simplified(),
            ),
        };
        let exprs = WalkerExprs {
            h: h_upper.to_vec(),
            a: a.to_vec(),
            h1: h1_expr,
            h0: h0_expr,
            lambda_profile,
            h_mentions_xp: h_cap.free_vars().contains(XP),
            params: params.to_vec(),
        };

        let a_zero = a.iter().all(Expr::is_zero);
        Ok(WalkerMetric {
            n,
            coord_names: coord_names.iter().map(|s| s.to_string()).collect(),
            domain,
            lambda,
            a_zero,
            body: Body::Fields {
                h: h_fields,
                a: a_fields,
                h_rep,
                exprs: Some(exprs),
            },
        })
    }

    /// Build from parsed strings (convenience over [`WalkerMetric::from_exprs`]).
    pub fn parse(
        coord_names: &[&str],
        h_upper: &[&str],
        a: &[&str],
        h_cap: &str,
        lambda: Option<f64>,
        domain: BoxDomain,
        params: &[(String, f64)],
    ) -> Result<WalkerMetric> {
        let h: Vec<Expr> = h_upper
            .iter()
            .map(|s| crate::exprlang::parse(s))
            .collect::<Result<_, _>>()?;
        let a: Vec<Expr> = a
            .iter()
            .map(|s| crate::exprlang::parse(s))
            .collect::<Result<_, _>>()?;
        let h_cap = crate::exprlang::parse(h_cap)?;
        WalkerMetric::from_exprs(coord_names, &h, &a, &h_cap, lambda, domain, params)
    }

    pub(crate) fn from_bulk(
        coord_names: &[String],
        domain: BoxDomain,
        lambda: Option<f64>,
        a_zero: bool,
        bulk: Arc<dyn WalkerBulk>,
    ) -> WalkerMetric {
        WalkerMetric {
            n: coord_names.len(),
            coord_names: coord_names.to_vec(),
            domain,
            lambda,
            a_zero,
            body: Body::Bulk(bulk),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// A ≡ 0, judged syntactically (or structurally for transform outputs).
    pub fn a_is_zero(&self) -> bool {
        self.a_zero
    }

    /// Exact structural profile knowledge: (lambda, h1_zero, h0_zero).
    /// `None` for a raw H that mentions x⁺ — such a metric must go through
    /// [`extract_profile`], which validates quadraticity by measurement.
    pub(crate) fn profile_flags(&self) -> Option<(f64, bool, bool)> {
        match &self.body {
            Body::Fields { h_rep, exprs, .. } => match h_rep {
                HRep::Profile {
                    lambda,
                    h1_zero,
                    h0_zero,
                    ..
                } => Some((*lambda, *h1_zero, *h0_zero)),
                HRep::Raw(_) => exprs.as_ref().and_then(|e| {
                    if e.h_mentions_xp {
                        None
                    } else {
                        Some((0.0, true, e.h0.is_zero()))
                    }
                }),
            },
            Body::Bulk(b) => Some(b.profile_flags()),
        }
    }

    /// Split-profile knowledge that is only meaningful once the quadratic
    /// profile has been validated numerically: the xp↦{0,±1} substitution
    /// split of a raw H.
    pub(crate) fn split_flags(&self) -> Option<(f64, bool, bool)> {
        if let Some(flags) = self.profile_flags() {
            return Some(flags);
        }
        match &self.body {
            Body::Fields { exprs, .. } => exprs.as_ref().and_then(|e| {
                if e.lambda_profile.is_nan() {
                    None
                } else {
                    Some((e.lambda_profile, e.h1.is_zero(), e.h0.is_zero()))
                }
            }),
            Body::Bulk(_) => None,
        }
    }

    pub(crate) fn exprs(&self) -> Option<&WalkerExprs> {
        match &self.body {
            Body::Fields { exprs, .. } => exprs.as_ref(),
            Body::Bulk(_) => None,
        }
    }

    /// Evaluate every slice component at jet-valued spatial/xm arguments
    /// (expression-backed metrics only; flows compose through this).
    pub(crate) fn slice_at_jets(&self, args: &[Jet2]) -> Result<SliceJets> {
        let n = self.n;
        debug_assert_eq!(args.len(), n + 1);
        match &self.body {
            Body::Fields { h, a, h_rep, .. } => {
                let dim = args[0].dim();
                let mut h_grid: Vec<Vec<Jet2>> = vec![vec![Jet2::constant(dim, 0.0); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let jet = h[tri(n, i, j)].eval(args)?;
                        h_grid[j][i] = jet.clone();
                        h_grid[i][j] = jet;
                    }
                }
                let a_jets: Vec<Jet2> = a.iter().map(|f| f.eval(args)).collect::<Result<_>>()?;
                let (h0, h1) = match h_rep {
                    HRep::Raw(field) => {
                        let with_xp = |xp: f64| -> Result<Jet2> {
                            let mut full = Vec::with_capacity(n + 2);
                            full.push(Jet2::constant(dim, xp));
                            full.extend(args.iter().cloned());
                            field.eval(&full)
                        };
                        let h_at0 = with_xp(0.0)?;
                        let h_at_p = with_xp(1.0)?;
                        let h_at_m = with_xp(-1.0)?;
                        (h_at0, (&h_at_p - &h_at_m).scale(0.5))
                    }
                    HRep::Profile { h1, h0, .. } => (h0.eval(args)?, h1.eval(args)?),
                };
                Ok(SliceJets {
                    h: h_grid,
                    a: a_jets,
                    h0,
                    h1,
                })
            }
            Body::Bulk(_) => Err(Error::Precondition(
                "this operation needs an expression-backed metric; transform outputs \
                 cannot be re-differentiated symbolically"
                    .to_string(),
            )),
        }
    }

    /// Slice components with all n+1 coordinates of `point` active.
    pub fn slice_jets(&self, point: &[f64]) -> Result<SliceJets> {
        match &self.body {
            Body::Fields { .. } => {
                let dim = point.len();
                let args: Vec<Jet2> = point
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Jet2::variable(dim, i, v))
                    .collect::<Result<_, _>>()
                    .map_err(Error::Jet)?;
                self.slice_at_jets(&args)
            }
            Body::Bulk(b) => b.slice_point(point),
        }
    }

    pub(crate) fn slice_data(&self, point: &[f64]) -> Result<SliceData> {
        SliceData::build(self, point)
    }

    /// Component jets of the full (n+2)-metric at a full point
    /// (x⁺, x¹..xⁿ, x⁻), all coordinates active.
    pub fn full_jets(&self, point: &[f64]) -> Result<Vec<Vec<Jet2>>> {
        let n = self.n;
        let m = n + 2;
        debug_assert_eq!(point.len(), m);
        let i_xp = 0;
        let i_xm = m - 1;

        let (h_grid, a_jets, h_cap) = match &self.body {
            Body::Fields { h, a, h_rep, .. } => {
                let args: Vec<Jet2> = point
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| Jet2::variable(m, i, v))
                    .collect::<Result<_, _>>()
                    .map_err(Error::Jet)?;
                let slice_args: Vec<Jet2> = args[1..].to_vec();
                let mut h_grid: Vec<Vec<Jet2>> = vec![vec![Jet2::constant(m, 0.0); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let jet = h[tri(n, i, j)].eval(&slice_args)?;
                        h_grid[j][i] = jet.clone();
                        h_grid[i][j] = jet;
                    }
                }
                let a_jets: Vec<Jet2> =
                    a.iter().map(|f| f.eval(&slice_args)).collect::<Result<_>>()?;
                let h_cap = match h_rep {
                    HRep::Raw(field) => field.eval(&args)?,
                    HRep::Profile {
                        lambda, h1, h0, ..
                    } => {
                        let xp = &args[i_xp];
                        let h1 = h1.eval(&slice_args)?;
                        let h0 = h0.eval(&slice_args)?;
                        &(&(xp * xp).scale(*lambda) + &(xp * &h1)) + &h0
                    }
                };
                (h_grid, a_jets, h_cap)
            }
            Body::Bulk(b) => {
                // slice jets live in n+1 active coordinates; embed into the
                // full space (h, A, H0, H1 are all x⁺-independent)
                let slice_point = &point[1..];
                let sj = b.slice_point(slice_point)?;
                let slots: Vec<usize> = (1..m).collect();
                let h_grid: Vec<Vec<Jet2>> = sj
                    .h
                    .iter()
                    .map(|row| row.iter().map(|j| j.embed(m, &slots)).collect())
                    .collect();
                let a_jets: Vec<Jet2> = sj.a.iter().map(|j| j.embed(m, &slots)).collect();
                let (lambda, _, _) = b.profile_flags();
                let xp = Jet2::variable(m, i_xp, point[i_xp]).map_err(Error::Jet)?;
                let h1 = sj.h1.embed(m, &slots);
                let h0 = sj.h0.embed(m, &slots);
                let h_cap = &(&(&xp * &xp).scale(lambda) + &(&xp * &h1)) + &h0;
                (h_grid, a_jets, h_cap)
            }
        };

        let zero = Jet2::constant(m, 0.0);
        let one = Jet2::constant(m, 1.0);
        let mut g: Vec<Vec<Jet2>> = vec![vec![zero.clone(); m]; m];
        g[i_xp][i_xm] = one.clone();
        g[i_xm][i_xp] = one;
        for i in 0..n {
            for j in 0..n {
                g[1 + i][1 + j] = h_grid[i][j].clone();
            }
            g[1 + i][i_xm] = a_jets[i].clone();
            g[i_xm][1 + i] = a_jets[i].clone();
        }
        g[i_xm][i_xm] = h_cap;
        Ok(g)
    }

    /// The assembled (n+2)-dimensional metric, ordering (x⁺, x¹..xⁿ, x⁻).
    pub fn assemble_full(&self) -> MetricField {
        let me = self.clone();
        MetricField::from_bulk(self.n + 2, move |point: &[f64]| me.full_jets(point))
    }

    /// Inverse-block accessors at a full point: B = −h⁻¹A and
    /// F = −H − AᵀB, the nonzero blocks of g⁻¹ beyond h⁻¹ and the unit
    /// off-corner.
    pub fn inverse_blocks(&self, point: &[f64]) -> Result<(V1, f64)> {
        let n = self.n;
        let g = self.full_jets(point)?;
        let h = mat2(n, |i, j| g[1 + i][1 + j].value);
        let a = vec1(n, |i| g[1 + i][n + 1].value);
        let h_cap = g[n + 1][n + 1].value;
        let (h_inv, _) = lu_invert(&h)?;
        let b = vec1(n, |i| -sum(n, |j| h_inv[i][j] * a[j]));
        let f = -h_cap - sum(n, |i| a[i] * b[i]);
        Ok((b, f))
    }
}

/// The x⁺-profile of H: H = lambda_hat·(x⁺)² + x⁺·H1 + H0.
pub struct HProfile {
    pub lambda_hat: f64,
    pub h1: Field,
    pub h0: Field,
    /// sup over probes and sample points of |½∂²₊H − lambda_hat|.
    pub cubic_residual: f64,
}

/// Measure the x⁺-profile of H. `probe_xplus` needs at least 3 values; the
/// second x⁺-derivative is probed at those values over a sample of slice
/// points, its mean becomes `lambda_hat`, and any deviation from constancy
/// is an error (H cannot then be Einstein).
pub fn extract_profile(
    w: &WalkerMetric,
    probe_xplus: &[f64],
    tol: f64,
) -> Result<HProfile> {
    if probe_xplus.len() < 3 {
        return Err(Error::Precondition(
            "extract_profile needs at least 3 probe values of x+".to_string(),
        ));
    }
    let n = w.n();

    // structurally profiled bodies are exact by construction; a raw H is
    // always measured
    let field = match &w.body {
        Body::Fields {
            h_rep: HRep::Raw(field),
            ..
        } => field,
        _ => {
            let (lambda, _, _) = w.profile_flags().expect("structural profile");
            let (h1, h0) = profile_fields(w);
            return Ok(HProfile {
                lambda_hat: lambda,
                h1,
                h0,
                cubic_residual: 0.0,
            });
        }
    };

    let slice_box = w.domain().drop_first();
    let samples = slice_box.sample(25, 0);
    let mut second_derivs = Vec::new();
    for s in &samples {
        for &xp in probe_xplus {
            // only x+ is active: one-dimensional jets are enough here
            let mut args = vec![Jet2::variable(1, 0, xp).map_err(Error::Jet)?];
            args.extend(s.iter().map(|&v| Jet2::constant(1, v)));
            let jet = field.eval(&args)?;
            second_derivs.push(0.5 * jet.hess_at(0, 0));
        }
    }
    let lambda_hat = second_derivs.iter().sum::<f64>() / second_derivs.len() as f64;
    let cubic_residual = second_derivs
        .iter()
        .map(|d| (d - lambda_hat).abs())
        .fold(0.0_f64, f64::max);
    if cubic_residual > tol {
        return Err(Error::ProfileNotQuadratic {
            residual: cubic_residual,
            tol,
        });
    }
    let (h1, h0) = profile_fields(w);
    let _ = n;
    Ok(HProfile {
        lambda_hat,
        h1,
        h0,
        cubic_residual,
    })
}

/// H1 and H0 as slice fields, whatever the body.
pub(crate) fn profile_fields(w: &WalkerMetric) -> (Field, Field) {
    let n = w.n();
    let w1 = w.clone();
    let h1 = FnField::shared(n + 1, move |args: &[Jet2]| {
        match &w1.body {
            Body::Fields { .. } => Ok(w1.slice_at_jets(args)?.h1),
            Body::Bulk(b) => {
                let point: Vec<f64> = args.iter().map(|j| j.value).collect();
                Ok(b.slice_point(&point)?.h1)
            }
        }
    });
    let w0 = w.clone();
    let h0 = FnField::shared(n + 1, move |args: &[Jet2]| {
        match &w0.body {
            Body::Fields { .. } => Ok(w0.slice_at_jets(args)?.h0),
            Body::Bulk(b) => {
                let point: Vec<f64> = args.iter().map(|j| j.value).collect();
                Ok(b.slice_point(&point)?.h0)
            }
        }
    });
    (h1, h0)
}

/// Verify the profile and return it, checking lambda_hat against an
/// expected Einstein constant.
pub(crate) fn checked_profile(w: &WalkerMetric, lambda: f64) -> Result<HProfile> {
    let profile = extract_profile(w, &[-1.0, 0.0, 1.0, 0.5], PROFILE_TOL)?;
    let dev = (profile.lambda_hat - lambda).abs();
    if dev > PROFILE_TOL * lambda.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "profile coefficient {} does not match the requested Lambda {}",
            profile.lambda_hat, lambda
        )));
    }
    Ok(profile)
}

/// Per-equation sup-norm residual over a sample point set.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ResidualReport {
    pub equation_id: String,
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
    pub sup_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn new(
        equation_id: &str,
        points: Vec<Vec<f64>>,
        sup_residual: f64,
        tolerance: f64,
    ) -> ResidualReport {
        ResidualReport {
            equation_id: equation_id.to_string(),
            points,
            sup_residual,
            tolerance,
            pass: sup_residual <= tolerance,
        }
    }
}

/// Collect an expression as a quadratic polynomial in xp, returning the
/// coefficients [c0, c1, c2] (each free of xp), or `None` when the
/// expression is not syntactically polynomial of degree ≤ 2 in xp.
pub(crate) fn xp_poly(e: &Expr) -> Option<[Expr; 3]> {
    use crate::exprlang::{BinOp, ExprKind};
    let zero = || Expr::num(0.0);
    let some3 = |c0: Expr, c1: Expr, c2: Expr| Some([c0, c1, c2]);
    match &e.kind {
        ExprKind::Var(n) if n == XP => some3(zero(), Expr::num(1.0), zero()),
        ExprKind::Num(_) | ExprKind::Var(_) => some3(e.clone(), zero(), zero()),
        ExprKind::Neg(a) => {
            let [c0, c1, c2] = xp_poly(a)?;
            some3(Expr::neg(c0), Expr::neg(c1), Expr::neg(c2))
        }
        ExprKind::Bin(BinOp::Add, a, b) => {
            let [a0, a1, a2] = xp_poly(a)?;
            let [b0, b1, b2] = xp_poly(b)?;
            some3(Expr::add(a0, b0), Expr::add(a1, b1), Expr::add(a2, b2))
        }
        ExprKind::Bin(BinOp::Sub, a, b) => {
            let [a0, a1, a2] = xp_poly(a)?;
            let [b0, b1, b2] = xp_poly(b)?;
            some3(Expr::sub(a0, b0), Expr::sub(a1, b1), Expr::sub(a2, b2))
        }
        ExprKind::Bin(BinOp::Mul, a, b) => {
            let [a0, a1, a2] = xp_poly(a)?;
            let [b0, b1, b2] = xp_poly(b)?;
            // convolution, rejecting degree > 2
            let deg_a = if !a2.is_zero() { 2 } else if !a1.is_zero() { 1 } else { 0 };
            let deg_b = if !b2.is_zero() { 2 } else if !b1.is_zero() { 1 } else { 0 };
            if deg_a + deg_b > 2 {
                return None;
            }
            let c0 = Expr::mul(a0.clone(), b0.clone());
            let c1 = Expr::add(Expr::mul(a0.clone(), b1.clone()), Expr::mul(a1.clone(), b0.clone()));
            let c2 = Expr::add(
                Expr::add(Expr::mul(a0, b2), Expr::mul(a2, b0)),
                Expr::mul(a1, b1),
            );
            some3(c0, c1, c2)
        }
        ExprKind::Bin(BinOp::Div, a, b) => {
            if b.free_vars().contains(XP) {
                return None;
            }
            let [a0, a1, a2] = xp_poly(a)?;
            some3(
                Expr::div(a0, (**b).clone()),
                Expr::div(a1, (**b).clone()),
                Expr::div(a2, (**b).clone()),
            )
        }
        ExprKind::Pow(a, c) => {
            if !a.free_vars().contains(XP) {
                return some3(e.clone(), zero(), zero());
            }
            let [a0, a1, a2] = xp_poly(a)?;
            if *c == 1.0 {
                return some3(a0, a1, a2);
            }
            if *c == 2.0 && a2.is_zero() {
                // (a0 + a1 xp)^2
                let c0 = Expr::mul(a0.clone(), a0.clone());
                let c1 = Expr::mul(Expr::num(2.0), Expr::mul(a0, a1.clone()));
                let c2 = Expr::mul(a1.clone(), a1);
                return some3(c0, c1, c2);
            }
            None
        }
        ExprKind::Call(_, a) => {
            if a.free_vars().contains(XP) {
                None
            } else {
                some3(e.clone(), zero(), zero())
            }
        }
    }
    .map(|[c0, c1, c2]| [c0.simplified(), c1.simplified(), c2.simplified()])
}

pub(crate) fn require_a_zero(w: &WalkerMetric, what: &str) -> Result<()> {
    if !w.a_is_zero() {
        return Err(Error::Precondition(format!(
            "{what} requires A ≡ 0 (syntactic); the metric's A is not the zero expression"
        )));
    }
    Ok(())
}

/// Evaluate a slice field at a plain point (all coordinates active).
pub fn eval_slice_field(field: &Field, point: &[f64]) -> Result<Jet2> {
    eval_at_point(field.as_ref(), point)
}
