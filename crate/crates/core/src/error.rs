use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected:.3e} arrivals exceeds the guard of {limit:.0e}")]
    ArrivalGuard { expected: f64, limit: f64 },

    #[error("mixing law PMF mass {mass} at n_max = {n_max} is short of 1 - 1e-10")]
    TruncatedPmf { mass: f64, n_max: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("autocorrelation is not positive semidefinite (reflection coefficient {coefficient} at lag {lag})")]
    NotPositiveSemidefinite { lag: usize, coefficient: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
