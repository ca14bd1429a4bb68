use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),

    #[error("axis {axis}: DSS does not change sign on [{lo}, {hi}] (DSS = {f_lo} .. {f_hi})")]
    NoSignChange {
        axis: String,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("axis {axis} is not strictly monotone: {reason}")]
    NonMonotone { axis: String, reason: String },

    #[error("axis {axis}: no convergence after {iterations} iterations")]
    NonConvergence { axis: String, iterations: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Errors raised while locating or calibrating a boundary.
    pub fn is_derivation_failure(&self) -> bool {
        matches!(
            self,
            Error::NoSignChange { .. } | Error::NonMonotone { .. } | Error::NonConvergence { .. }
        )
    }
}
