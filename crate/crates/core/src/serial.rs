//! Lagged-pair statistics for a single series: conditional autocorrelation
//! (CACF), the plain ACF, the ACF of squares, and simulated null bands.
//!
//! With `m` observations the lag-`h` statistics use the `n = m - h` pairs
//! `(X_t, X_{t+h})`. Plain autocorrelation uses separate means and variances
//! for the front and back windows, i.e. it is the Pearson correlation of the
//! two windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};
use crate::estimators::{pearson, qcc_hat, QccValue, Status};
use crate::models::SeriesSampler;
use crate::quantile::{ceil_index, QuantileSplit};
use crate::rng;

/// A finite, time-ordered series with at least two observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series(Vec<f64>);

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(QccError::SeriesTooShort {
                len: values.len(),
                lag: 0,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(QccError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn squared(&self) -> Series {
        Series(self.0.iter().map(|v| v * v).collect())
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = QccError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Series::new(v)
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_lag(len: usize, h: usize) -> Result<()> {
    if h == 0 || len < h + 2 {
        return Err(QccError::SeriesTooShort { len, lag: h });
    }
    Ok(())
}

/// `(X_1..X_n, X_{1+h}..X_{n+h})` with `n = m - h >= 2`.
pub fn lagged_pairs(series: &Series, h: usize) -> Result<(&[f64], &[f64])> {
    lagged_slices(series.values(), h)
}

pub(crate) fn lagged_slices(v: &[f64], h: usize) -> Result<(&[f64], &[f64])> {
    check_lag(v.len(), h)?;
    let n = v.len() - h;
    Ok((&v[..n], &v[h..]))
}

/// Lag-`h` conditional autocorrelation with the same split on both windows.
pub fn cacf_at(series: &Series, h: usize, split: QuantileSplit) -> Result<QccValue> {
    cacf_slice(series.values(), h, split)
}

pub(crate) fn cacf_slice(v: &[f64], h: usize, split: QuantileSplit) -> Result<QccValue> {
    let (front, back) = lagged_slices(v, h)?;
    qcc_hat(front, back, split, split)
}

pub(crate) fn acf_slice(v: &[f64], h: usize) -> Result<QccValue> {
    let (front, back) = lagged_slices(v, h)?;
    pearson(front, back)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramPoint {
    pub lag: usize,
    pub value: f64,
    pub status: Status,
}

fn check_max_lag(len: usize, max_lag: usize) -> Result<()> {
    if max_lag == 0 || max_lag + 2 > len {
        return Err(QccError::SeriesTooShort { len, lag: max_lag });
    }
    Ok(())
}

fn correlogram<F>(max_lag: usize, f: F) -> Result<Vec<CorrelogramPoint>>
where
    F: Fn(usize) -> Result<QccValue>,
{
    (1..=max_lag)
        .map(|lag| {
            let v = f(lag)?;
            Ok(CorrelogramPoint {
                lag,
                value: v.value,
                status: v.status,
            })
        })
        .collect()
}

/// Sample CACF for lags `1..=max_lag`.
pub fn cacf(series: &Series, max_lag: usize, split: QuantileSplit) -> Result<Vec<CorrelogramPoint>> {
    check_max_lag(series.len(), max_lag)?;
    correlogram(max_lag, |h| cacf_at(series, h, split))
}

/// Sample ACF (of the squared series when `squared`) for lags `1..=max_lag`.
pub fn acf(series: &Series, max_lag: usize, squared: bool) -> Result<Vec<CorrelogramPoint>> {
    check_max_lag(series.len(), max_lag)?;
    let sq;
    let v = if squared {
        sq = series.squared();
        sq.values()
    } else {
        series.values()
    };
    correlogram(max_lag, |h| acf_slice(v, h))
}

/// Which correlogram a null band is simulated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelogramKind {
    Conditional { split: QuantileSplit },
    Plain,
    Squared,
}

impl CorrelogramKind {
    fn eval(&self, v: &[f64], h: usize) -> Result<f64> {
        let r = match self {
            CorrelogramKind::Conditional { split } => cacf_slice(v, h, *split)?,
            CorrelogramKind::Plain => acf_slice(v, h)?,
            CorrelogramKind::Squared => {
                let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
                acf_slice(&sq, h)?
            }
        };
        Ok(r.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullBand {
    pub lag: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Minimum replicate count for [`null_bands`].
pub const MIN_BAND_REPLICATES: usize = 200;

/// Per-lag `(alpha/2, 1 - alpha/2)` empirical quantiles of the statistic over
/// `replicates` null series of length `m`.
pub fn null_bands(
    m: usize,
    max_lag: usize,
    kind: CorrelogramKind,
    null_sampler: &dyn SeriesSampler,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<NullBand>> {
    if replicates < MIN_BAND_REPLICATES {
        return Err(QccError::TooFewReplicates {
            got: replicates,
            min: MIN_BAND_REPLICATES,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(QccError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    check_max_lag(m, max_lag)?;
    let rows: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let v = null_sampler.sample_series(m, &mut rng::replicate(seed, i as u64))?;
            (1..=max_lag).map(|h| kind.eval(&v, h)).collect()
        })
        .collect::<Result<_>>()?;

    let lo_idx = ceil_index(replicates as f64 * alpha / 2.0).clamp(1, replicates) - 1;
    let hi_idx = ceil_index(replicates as f64 * (1.0 - alpha / 2.0)).clamp(1, replicates) - 1;
    Ok((0..max_lag)
        .map(|j| {
            let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            col.sort_by(f64::total_cmp);
            NullBand {
                lag: j + 1,
                lo: col[lo_idx],
                hi: col[hi_idx],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, ProcessSpec, SeriesModel};

    fn split(p: f64, q: f64) -> QuantileSplit {
        QuantileSplit::new(p, q).unwrap()
    }

    fn series(v: Vec<f64>) -> Series {
        Series::new(v).unwrap()
    }

    #[test]
    fn series_validation() {
        assert!(Series::new(vec![1.0]).is_err());
        assert_eq!(
            Series::new(vec![1.0, f64::NAN]),
            Err(QccError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn lagged_pair_cases() {
        let s = series(vec![1.0, 2.0, 3.0, 4.0]);
        let (f, b) = lagged_pairs(&s, 1).unwrap();
        assert_eq!((f, b), (&[1.0, 2.0, 3.0][..], &[2.0, 3.0, 4.0][..]));
        assert!(matches!(lagged_pairs(&s, 3), Err(QccError::SeriesTooShort { .. })));
        assert!(lagged_pairs(&s, 0).is_err());
        let s = series(models::sample_gaussian_wn(501, 1));
        assert_eq!(lagged_pairs(&s, 1).unwrap().0.len(), 500);
    }

    #[test]
    fn cacf_cases() {
        let s = series(models::sample_gaussian_wn(1001, 2));
        assert!(cacf_at(&s, 1, split(0.01, 0.99)).unwrap().value.abs() < 0.1);

        let c = series(vec![0.5; 50]);
        let flat = cacf(&c, 3, split(0.1, 0.9)).unwrap();
        assert!(flat.iter().all(|p| p.value == 0.0 && p.status != Status::Ok));

        // X_{t+1} = X_t up to a constant shift on a geometric sequence
        let g = series((0..40).map(|i| 1.1f64.powi(i)).collect());
        assert!((cacf_at(&g, 1, split(0.1, 0.9)).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cacf_is_qcc_hat_on_lagged_windows() {
        let s = series(models::sample_ma1(0.5, 300, 3).unwrap());
        let sp = split(0.05, 0.95);
        for h in 1..5 {
            let (f, b) = lagged_pairs(&s, h).unwrap();
            assert_eq!(cacf_at(&s, h, sp).unwrap(), qcc_hat(f, b, sp, sp).unwrap());
        }
    }

    #[test]
    fn acf_cases() {
        let t = series((1..=100).map(f64::from).collect());
        assert!(acf(&t, 1, false).unwrap()[0].value > 0.9);
        let s = series(models::sample_gaussian_wn(1000, 4));
        assert!(acf(&s, 10, false).unwrap().iter().all(|p| p.value.abs() < 0.08));
        let p = models::GarchParams::new(0.001, 0.6, 0.2, 1000).unwrap();
        let g = series(models::sample_garch11_path(p, 20_000, 5).unwrap());
        assert!(acf(&g, 1, true).unwrap()[0].value > 0.1);
        let lags: Vec<usize> = acf(&g, 4, false).unwrap().iter().map(|p| p.lag).collect();
        assert_eq!(lags, vec![1, 2, 3, 4]);
        assert!(acf(&t, 99, false).is_err());
    }

    #[test]
    fn correlograms_detect_dependence() {
        let wn = ProcessSpec::clean(SeriesModel::GaussianWn).unwrap();
        let sp = split(0.01, 0.99);
        let ar = series(models::sample_ar1(0.5, 250, 6).unwrap());
        let band = null_bands(250, 3, CorrelogramKind::Conditional { split: sp }, &wn, 1000, 0.05, 7)
            .unwrap();
        let c = cacf(&ar, 3, sp).unwrap();
        assert!(c[0].value > band[0].hi);
        assert!(c[0].value > c[2].value);
    }

    #[test]
    fn band_properties() {
        let wn = ProcessSpec::clean(SeriesModel::GaussianWn).unwrap();
        let kind = CorrelogramKind::Conditional {
            split: split(0.01, 0.99),
        };
        let b = null_bands(250, 5, kind, &wn, 1000, 0.05, 8).unwrap();
        let halves: Vec<f64> = b.iter().map(|x| (x.hi - x.lo) / 2.0).collect();
        for x in &b {
            let half = (x.hi - x.lo) / 2.0;
            assert!(x.lo < 0.0 && x.hi > 0.0);
            assert!((x.lo + x.hi).abs() < 0.2 * half, "{x:?}");
        }
        let max = halves.iter().cloned().fold(f64::MIN, f64::max);
        let min = halves.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - min) / max < 0.25);

        let wide = null_bands(250, 5, kind, &wn, 1000, 0.01, 8).unwrap();
        for (n, w) in b.iter().zip(&wide) {
            assert!(w.lo <= n.lo && w.hi >= n.hi);
        }
        assert!(null_bands(250, 5, kind, &wn, 199, 0.05, 8).is_err());
    }

    #[test]
    fn null_band_exceedance_rate() {
        let wn = ProcessSpec::clean(SeriesModel::GaussianWn).unwrap();
        let sp = split(0.05, 0.95);
        let kind = CorrelogramKind::Conditional { split: sp };
        let b = null_bands(200, 20, kind, &wn, 1000, 0.05, 9).unwrap();
        let mut outside = 0usize;
        for i in 0..500u64 {
            let s = series(models::sample_gaussian_wn(200, 10_000 + i));
            for p in cacf(&s, 20, sp).unwrap() {
                let band = &b[p.lag - 1];
                outside += usize::from(p.value < band.lo || p.value > band.hi);
            }
        }
        let rate = outside as f64 / (500.0 * 20.0);
        assert!((rate - 0.05).abs() < 0.03, "{rate}");
    }

    proptest::proptest! {
        #[test]
        fn cacf_affine_invariance(
            v in proptest::collection::vec(-50.0..50.0f64, 8..80),
            a in 0.1..10.0f64,
            b in -10.0..10.0f64,
        ) {
            let s = series(v.clone());
            let t = series(v.iter().map(|x| a * x + b).collect());
            let sp = split(0.1, 0.85);
            let max_lag = (v.len() - 2).min(5);
            for (p, q) in cacf(&s, max_lag, sp).unwrap().iter().zip(cacf(&t, max_lag, sp).unwrap()) {
                proptest::prop_assert!((p.value - q.value).abs() <= 1e-12);
            }
        }
    }
}
