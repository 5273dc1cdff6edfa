use thiserror::Error;

pub type Result<T> = std::result::Result<T, SizeError>;

/// Every failure the size engines, solvers and front end can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SizeError {
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("scenario unsupported: {design} design with {endpoint} endpoint")]
    UnsupportedScenario {
        design: &'static str,
        endpoint: &'static str,
    },

    #[error("invalid combination: {0}")]
    InvalidCombination(String),

    #[error("no finite sample size: {0}")]
    NoFiniteSize(String),

    #[error("power out of range: {0}")]
    PowerOutOfRange(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("non-finite function value at x = {0}")]
    NonFinite(f64),

    #[error("integer search passed the cap of {0}")]
    SearchCapExceeded(u64),
}

impl SizeError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SizeError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SizeError::NoFiniteSize(_)
            | SizeError::PowerOutOfRange(_)
            | SizeError::SearchCapExceeded(_) => 3,
            _ => 2,
        }
    }
}
