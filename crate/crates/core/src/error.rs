use thiserror::Error;

use crate::estimators::Status;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QccError {
    #[error("sample is empty")]
    EmptySample,

    #[error("order statistic index {k} out of range for sample of length {len}")]
    IndexOutOfRange { k: usize, len: usize },

    #[error("invalid quantile split ({p}, {q}): need 0 < p < q < 1")]
    InvalidSplit { p: f64, q: f64 },

    #[error("length mismatch: x has {x} values, y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("series of length {len} is too short for lag {lag}")]
    SeriesTooShort { len: usize, lag: usize },

    #[error("series contains a non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("sampler cannot provide the theoretical conditioning rectangle")]
    RequiresKnownQuantiles,

    #[error("alpha {alpha} is too small for a null distribution of {n} values")]
    AlphaTooSmallForN { alpha: f64, n: usize },

    #[error("too few replicates: got {got}, need at least {min}")]
    TooFewReplicates { got: usize, min: usize },

    #[error("statistic could not be evaluated: {0:?}")]
    StatisticFailure(Status),
}

pub type Result<T> = std::result::Result<T, QccError>;
