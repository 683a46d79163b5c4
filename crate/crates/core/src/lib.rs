//! Numerical toolkit for Walker-form Lorentzian metrics.
//!
//! Metric components are written as parsed expressions (or composed flow
//! evaluators), every quantity is evaluated over second-order forward-mode
//! jets, curvature comes from exact derivatives, and the Einstein systems
//! for the Walker ansatz are checked as sup-norm residuals over sampled
//! boxes. Coordinate simplifications (killing the off-block one-form A, the
//! linear profile term H1, or the potential H0) are realized as numerically
//! integrated flows with verified post-conditions.

pub mod error;
pub mod exprlang;
pub mod field;
pub mod geometry;
pub mod jets;
pub mod walker;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
