use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("sieve limit {requested} exceeds the configured cap {cap}")]
    LimitExceedsCap { requested: u64, cap: u64 },

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole at {0}")]
    Pole(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("invalid fit: {0}")]
    InvalidFit(String),

    #[error("sign condition violated: {0}")]
    SignCondition(String),

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

pub(crate) fn out_of_range(what: &'static str, value: f64, range: impl Into<String>) -> LabError {
    LabError::OutOfRange {
        what,
        value,
        range: range.into(),
    }
}
