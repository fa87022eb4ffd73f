use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by the solvers and operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha = {alpha} is outside (0, 1]")]
    InvalidAlpha { alpha: f64 },

    #[error("alpha = {alpha} is within {tol:e} of 1, where the operator divides by 1 - alpha")]
    AlphaSingular { alpha: f64, tol: f64 },

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    Domain { what: &'static str, value: f64, lo: f64, hi: f64 },

    /// A compatibility condition on the data does not hold, e.g. `f(0)=0`.
    #[error("compatibility condition {condition} violated: measured {measured:e}, tolerance {tol:e}")]
    Compatibility { condition: String, measured: f64, tol: f64 },

    #[error("Picard iteration stopped after {iterations} iterations, last update {last_update:e}")]
    NoConvergence { iterations: usize, last_update: f64 },

    #[error("existence hypotheses violated: {}", .0.join("; "))]
    HypothesisViolation(Vec<String>),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::Domain { what, value, lo, hi }
    }
}
