//! Quantile conditional moments and correlation.
//!
//! Moments use the plain `1/count` normalizer, so small in-set counts give
//! the biased (maximum-likelihood style) variance. Estimators never fail on
//! an empty or degenerate conditioning set; they report it through
//! [`Status`] and return zero, which lets Monte-Carlo batches run to the end.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};
use crate::models::PairSampler;
use crate::quantile::{contains, rectangle_hat, QuantileSplit, Rectangle};
use crate::rng::{self, label};

/// Relative tolerance below which a conditional variance counts as zero.
pub const DEGENERATE_VARIANCE_TOL: f64 = 1e-12;

/// Minimum draw count for [`qcc_population_mc`].
pub const MIN_POPULATION_DRAWS: usize = 1000;
/// Minimum replicate count for [`set_error_decomposition`].
pub const MIN_DECOMPOSITION_REPS: usize = 100;
/// Draws used for the reference value in [`set_error_decomposition`].
pub const REFERENCE_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    EmptySet,
    DegenerateVariance,
}

impl Status {
    pub fn is_ok(self) -> bool {
        self == Status::Ok
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::EmptySet => "empty_set",
            Status::DegenerateVariance => "degenerate_variance",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov: f64,
    pub count: usize,
    pub status: Status,
}

impl CondMoments {
    const EMPTY: CondMoments = CondMoments {
        mean_x: 0.0,
        mean_y: 0.0,
        var_x: 0.0,
        var_y: 0.0,
        cov: 0.0,
        count: 0,
        status: Status::EmptySet,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QccValue {
    pub value: f64,
    pub status: Status,
}

impl QccValue {
    pub fn failed(status: Status) -> Self {
        Self { value: 0.0, status }
    }
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(QccError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.is_empty() {
        return Err(QccError::EmptySample);
    }
    Ok(())
}

/// Conditional means, variances and covariance over the points inside `rect`.
pub fn cond_moments_on(x: &[f64], y: &[f64], rect: &Rectangle) -> Result<CondMoments> {
    check_lengths(x, y)?;
    if rect.is_empty() {
        return Ok(CondMoments::EMPTY);
    }

    let mut count = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        if contains(rect, a, b) {
            count += 1;
            sx += a;
            sy += b;
        }
    }
    if count == 0 {
        return Ok(CondMoments::EMPTY);
    }
    let k = count as f64;
    let (mean_x, mean_y) = (sx / k, sy / k);

    let (mut vx, mut vy, mut cxy, mut qx, mut qy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        if contains(rect, a, b) {
            let (da, db) = (a - mean_x, b - mean_y);
            vx += da * da;
            vy += db * db;
            cxy += da * db;
            qx += a * a;
            qy += b * b;
        }
    }
    let (var_x, var_y, cov) = (vx / k, vy / k, cxy / k);

    let tol_x = DEGENERATE_VARIANCE_TOL * (qx / k).max(1.0);
    let tol_y = DEGENERATE_VARIANCE_TOL * (qy / k).max(1.0);
    let status = if var_x < tol_x || var_y < tol_y {
        Status::DegenerateVariance
    } else {
        Status::Ok
    };
    Ok(CondMoments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov,
        count,
        status,
    })
}

/// Conditional correlation on a known rectangle.
pub fn qcc_bar(x: &[f64], y: &[f64], rect: &Rectangle) -> Result<QccValue> {
    let m = cond_moments_on(x, y, rect)?;
    Ok(correlation_of(&m))
}

fn correlation_of(m: &CondMoments) -> QccValue {
    if !m.status.is_ok() {
        return QccValue::failed(m.status);
    }
    QccValue {
        value: (m.cov / (m.var_x * m.var_y).sqrt()).clamp(-1.0, 1.0),
        status: Status::Ok,
    }
}

/// Conditional correlation on the empirical rectangle built from the sample.
pub fn qcc_hat(
    x: &[f64],
    y: &[f64],
    split_x: QuantileSplit,
    split_y: QuantileSplit,
) -> Result<QccValue> {
    check_lengths(x, y)?;
    let rect = rectangle_hat(x, y, split_x, split_y)?;
    qcc_bar(x, y, &rect)
}

/// Full-sample Pearson correlation with the same `1/n` moment formulas.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<QccValue> {
    qcc_bar(x, y, &Rectangle::FULL)
}

/// Monte-Carlo approximation of the population QCC: `qcc_hat` on `draws`
/// fresh pairs from `sampler`.
pub fn qcc_population_mc(
    sampler: &dyn PairSampler,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    draws: usize,
    seed: u64,
) -> Result<f64> {
    if draws < MIN_POPULATION_DRAWS {
        return Err(QccError::TooFewReplicates {
            got: draws,
            min: MIN_POPULATION_DRAWS,
        });
    }
    let (x, y) = sampler.sample_pairs(draws, &mut rng::seeded(seed))?;
    let v = qcc_hat(&x, &y, split_x, split_y)?;
    if !v.status.is_ok() {
        return Err(QccError::StatisticFailure(v.status));
    }
    Ok(v.value)
}

/// Error split between estimating the conditioning set and estimating the
/// moments on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetErrorDecomposition {
    /// Mean of `(rho_hat - rho_ref)^2`.
    pub mse_hat: f64,
    /// Mean of `(rho_hat - rho_bar)^2`.
    pub msd: f64,
    /// `msd / mse_hat`.
    pub ratio: f64,
    pub reference: f64,
    /// Replicates where either estimator reported a non-OK status.
    pub non_ok: usize,
}

/// [`set_error_decomposition_against`] with a reference value computed from
/// [`REFERENCE_DRAWS`] draws.
pub fn set_error_decomposition(
    sampler: &dyn PairSampler,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    n: usize,
    reps: usize,
    seed: u64,
) -> Result<SetErrorDecomposition> {
    sampler.theoretical_rectangle(split_x, split_y)?;
    let reference = qcc_population_mc(
        sampler,
        split_x,
        split_y,
        REFERENCE_DRAWS,
        rng::derive(seed, label::REFERENCE),
    )?;
    set_error_decomposition_against(sampler, split_x, split_y, n, reps, reference, seed)
}

/// Replicates `rho_hat` (empirical rectangle) and `rho_bar` (theoretical
/// rectangle) on the same samples of size `n` and compares them with a fixed
/// reference value.
pub fn set_error_decomposition_against(
    sampler: &dyn PairSampler,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    n: usize,
    reps: usize,
    reference: f64,
    seed: u64,
) -> Result<SetErrorDecomposition> {
    if reps < MIN_DECOMPOSITION_REPS {
        return Err(QccError::TooFewReplicates {
            got: reps,
            min: MIN_DECOMPOSITION_REPS,
        });
    }
    let rect = sampler.theoretical_rectangle(split_x, split_y)?;
    let stream = rng::derive(seed, label::REPLICATES);
    let pairs: Vec<(QccValue, QccValue)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let (x, y) = sampler.sample_pairs(n, &mut rng::replicate(stream, i as u64))?;
            Ok((qcc_hat(&x, &y, split_x, split_y)?, qcc_bar(&x, &y, &rect)?))
        })
        .collect::<Result<_>>()?;

    let (mut se, mut sd, mut non_ok) = (0.0, 0.0, 0usize);
    for (hat, bar) in &pairs {
        if !(hat.status.is_ok() && bar.status.is_ok()) {
            non_ok += 1;
        }
        se += (hat.value - reference).powi(2);
        sd += (hat.value - bar.value).powi(2);
    }
    let mse_hat = se / reps as f64;
    let msd = sd / reps as f64;
    Ok(SetErrorDecomposition {
        mse_hat,
        msd,
        ratio: msd / mse_hat,
        reference,
        non_ok,
    })
}
