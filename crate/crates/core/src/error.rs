//! Error types shared by the geometry modules.

use thiserror::Error;

use crate::expr::EvalError;

/// Errors surfaced by metric/connection/curvature evaluation.
///
/// Degeneracy is deliberately a first-class error rather than something to
/// regularize away: a vanishing determinant of an assembled product metric
/// is itself one of the facts the engine is checking for.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// Expression evaluation failed (domain error in a metric entry,
    /// warping function or connection coefficient).
    #[error("expression evaluation failed: {0}")]
    Eval(#[from] EvalError),

    /// The symmetric solve guard tripped: |det| <= 1e-12 * scale.
    #[error("degenerate matrix: |det| = {det:.3e} <= 1e-12 * scale = {scale:.3e}")]
    DegenerateMatrix { det: f64, scale: f64 },

    /// c^2 * b1 * b2 is outside [0, 1); the assembled cross-term metric is
    /// not Riemannian there.
    #[error("inadmissible cross-term metric: c^2*b1*b2 = {value:.6} is not in [0, 1)")]
    InadmissibleMetric { value: f64 },

    /// A numerically probed precondition does not hold (for example the
    /// parallel-gradient hypothesis of the closed-form curvature blocks).
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Chart or scene construction failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A point, vector or expression has the wrong dimension for the chart.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl GeomError {
    pub fn validation(msg: impl Into<String>) -> Self {
        GeomError::Validation(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        GeomError::PreconditionViolated(msg.into())
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
