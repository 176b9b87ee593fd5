use thiserror::Error;

/// Errors produced by the inference library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("outside the domain of the closed-form bound: {0}")]
    Domain(String),

    #[error("root bracket [{lo}, {hi}] does not change sign (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    BracketSignFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("numerical failure in {context}: {detail}")]
    NumericalFailure { context: &'static str, detail: String },

    #[error(
        "no critical value attains level {alpha}: the worst-case rejection probability \
         stays above {floor:.4} for every c > m^(-1/2)"
    )]
    NoValidCriticalValue { alpha: f64, floor: f64 },

    #[error("design violation in cluster `{cluster}`: {reason}")]
    DesignViolation { cluster: String, reason: String },

    #[error("rank-deficient regression in cluster `{cluster}`")]
    RankDeficient { cluster: String },

    #[error("line {line}: {message}")]
    Schema { line: u64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
