use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("ill-conditioned similarity transform (condition estimate {0:.3e}); perturb the input")]
    IllConditioned(f64),

    /// A quotient is not holomorphic at `point`: the numerator vanishes to a
    /// lower order than required. `label` names the obstructing condition.
    #[error("not divisible at ({re:.6}, {im:.6}): {label} (residual {residual:.3e})", re = point.re, im = point.im)]
    NotDivisible {
        point: Complex64,
        label: String,
        residual: f64,
    },

    #[error("unsupported base point: {0}")]
    UnsupportedBase(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible constraint system: {reason} (minimum degree {min_degree:?})")]
    Infeasible {
        reason: String,
        min_degree: Option<usize>,
    },

    #[error("retries exhausted while searching for phi inside G_n; best margin {best_margin:.3e}")]
    RetriesExhausted { best_margin: f64 },

    #[error("conditions failed: {0}")]
    ConditionsFailed(String),
}

pub type Result<T> = std::result::Result<T, LiftError>;
