use thiserror::Error;

/// Errors raised by every module of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: max asymmetry {max_asymmetry:e} exceeds tolerance {tolerance:e}"
    )]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("function `{label}` is not finite at x = {x}")]
    FunctionEvaluation { label: String, x: f64 },

    #[error("function `{label}` provides derivatives up to order {available}, but order {required} is required")]
    MissingDerivative {
        label: String,
        required: usize,
        available: usize,
    },

    #[error("order {value} outside the supported range [{min}, {max}]")]
    OrderOutOfRange {
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("multi-index sum needs {terms} terms, above the budget of {cap}")]
    Budget { terms: u128, cap: u128 },

    #[error("{what}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    Verification {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("t-quadrature did not converge: last estimates {coarse:?} and {fine:?}")]
    QuadratureNotConverged { coarse: Vec<f64>, fine: Vec<f64> },

    #[error("grid [{lo}, {hi}] does not cover the measure support; need [{need_lo}, {need_hi}]")]
    GridTooSmall {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("function `{label}` does not support {what}")]
    Unsupported { label: String, what: String },

    #[error("moment condition violated for degrees {failing:?}")]
    MomentCondition { failing: Vec<(usize, f64)> },

    #[error("seminorm integral diverges for `{label}` at the {end} end of the t-range")]
    Divergent { label: String, end: &'static str },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
