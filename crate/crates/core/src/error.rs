use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("covariance is indefinite (pivot {pivot:e} at index {index})")]
    Indefinite { index: usize, pivot: f64 },

    #[error("bearing undefined for a point at the origin")]
    UndefinedBearing,

    #[error("measurement noise variance is infinite (SNR = {0})")]
    InfiniteVariance(f64),

    #[error("false-alarm probability {0} outside (0, 1)")]
    PfaOutOfDomain(f64),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("non-finite value in {what} at slot {slot}")]
    NonFinite { what: String, slot: u64 },

    #[error("checkpoint incompatible: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
