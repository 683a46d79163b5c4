use thiserror::Error;

use crate::exprlang::{EvalError, ParseError};

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("jet error: {0}")]
    Jet(#[from] JetError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("singular metric at point {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("ill-conditioned metric at point {point:?} (cond ~ {cond:.3e})")]
    IllConditioned { point: Vec<f64>, cond: f64 },

    #[error("metric construction: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("H is not quadratic in x+ (cubic residual {residual:.3e} exceeds {tol:.3e})")]
    ProfileNotQuadratic { residual: f64, tol: f64 },

    #[error("curvature decomposition reconstruction mismatch ({0:.3e})")]
    DecompositionMismatch(f64),

    #[error("flow left the declared box at {point:?} (x- = {s})")]
    FlowEscape { point: Vec<f64>, s: f64 },

    #[error("flow Jacobian became singular near x- = {0}")]
    FlowSingular(f64),

    #[error("flow step calibration failed to reach agreement {tol:.1e} after {halvings} halvings")]
    FlowCalibration { tol: f64, halvings: u32 },

    #[error("Lambda = 0 but the requested operation needs a non-zero Einstein constant")]
    LambdaZero,

    #[error("grid marching failed: {0}")]
    Grid(String),

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("spec file: {0}")]
    SpecFile(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Errors from the jet kernel itself.
#[derive(Debug, Error, PartialEq)]
pub enum JetError {
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("division by zero value")]
    DivByZero,

    #[error("{func} of non-positive value {value}")]
    Domain { func: &'static str, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
