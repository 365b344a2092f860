//! Quantile conditional correlation, conditional autocorrelation, and
//! Monte-Carlo / bootstrap tests of serial independence.

pub mod error;
pub mod estimators;
pub mod inference;
pub mod models;
pub mod quantile;
pub mod rng;
pub mod serial;

pub use error::{QccError, Result};
pub use estimators::{cond_moments_on, qcc_bar, qcc_hat, CondMoments, QccValue, Status};
pub use inference::{NullDistribution, PowerResult, RejectionRegion, StatisticSpec};
pub use quantile::{Interval, QuantileSplit, Rectangle};
pub use serial::{CorrelogramPoint, NullBand, Series};
