//! Monte-Carlo and bootstrap tests of serial independence.
//!
//! A null distribution is simulated for a statistic, the two-sided region
//! `(-inf, lo] u [hi, inf)` is read off its empirical quantiles, and a series
//! is rejected when its statistic falls in the region. Every replicate draws
//! from its own `(seed, index)` stream, so results do not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QccError, Result};
use crate::estimators::QccValue;
use crate::models::SeriesSampler;
use crate::quantile::{ceil_index, QuantileSplit};
use crate::rng::{self, label, SimRng};
use crate::serial::{acf_slice, cacf_slice};

pub const MIN_NULL_REPLICATES: usize = 100;
pub const MIN_POWER_TRIALS: usize = 100;
pub const MIN_BOOTSTRAP_RESAMPLES: usize = 100;
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatisticSpec {
    /// Conditional autocorrelation at lag `h`.
    CondAutocorr { h: usize, split: QuantileSplit },
    /// Plain autocorrelation at lag `h`.
    Autocorr { h: usize },
    /// Autocorrelation of the squared series at lag `h`.
    AutocorrSquared { h: usize },
}

impl StatisticSpec {
    pub fn cond(h: usize, p: f64, q: f64) -> Result<Self> {
        Self::CondAutocorr {
            h,
            split: QuantileSplit::new(p, q)?,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        if self.lag() == 0 {
            return Err(QccError::InvalidParameter("lag must be at least 1".into()));
        }
        Ok(self)
    }

    pub fn lag(&self) -> usize {
        match *self {
            StatisticSpec::CondAutocorr { h, .. }
            | StatisticSpec::Autocorr { h }
            | StatisticSpec::AutocorrSquared { h } => h,
        }
    }

    /// Statistic value with its estimator status.
    pub fn evaluate(&self, series: &[f64]) -> Result<QccValue> {
        match *self {
            StatisticSpec::CondAutocorr { h, split } => cacf_slice(series, h, split),
            StatisticSpec::Autocorr { h } => acf_slice(series, h),
            StatisticSpec::AutocorrSquared { h } => {
                let sq: Vec<f64> = series.iter().map(|v| v * v).collect();
                acf_slice(&sq, h)
            }
        }
    }

    /// Human-readable column label, e.g. `rho_(0.01,0.99)(1)`.
    pub fn label(&self) -> String {
        match self {
            StatisticSpec::CondAutocorr { h, split } => format!("rho_{split}({h})"),
            StatisticSpec::Autocorr { h } => format!("rho({h})"),
            StatisticSpec::AutocorrSquared { h } => format!("rho({h})(x^2)"),
        }
    }
}

/// Compact form: `cacf:H:P:Q`, `acf:H`, `acf2:H`.
impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticSpec::CondAutocorr { h, split } => {
                write!(f, "cacf:{h}:{}:{}", split.p(), split.q())
            }
            StatisticSpec::Autocorr { h } => write!(f, "acf:{h}"),
            StatisticSpec::AutocorrSquared { h } => write!(f, "acf2:{h}"),
        }
    }
}

impl FromStr for StatisticSpec {
    type Err = QccError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || QccError::InvalidParameter(format!("cannot parse statistic `{s}`"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let lag = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["cacf", h, p, q] => StatisticSpec::CondAutocorr {
                h: lag(h)?,
                split: QuantileSplit::new(num(p)?, num(q)?)?,
            },
            ["acf", h] => StatisticSpec::Autocorr { h: lag(h)? },
            ["acf2", h] => StatisticSpec::AutocorrSquared { h: lag(h)? },
            _ => return Err(bad()),
        };
        spec.validated()
    }
}

/// Sorted simulated values of a statistic under the null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub values: Vec<f64>,
    /// Series length the values were simulated for.
    pub n: usize,
    pub statistic: StatisticSpec,
    /// Replicates whose statistic had a non-OK status and was recorded as 0.
    pub non_ok: usize,
}

impl NullDistribution {
    fn from_values(mut values: Vec<f64>, n: usize, statistic: StatisticSpec, non_ok: usize) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            values,
            n,
            statistic,
            non_ok,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRegion {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
}

impl RejectionRegion {
    /// Closed two-sided region: `value <= lo || value >= hi`.
    pub fn rejects(&self, value: f64) -> bool {
        value <= self.lo || value >= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub statistic: StatisticSpec,
    pub rejected: usize,
    pub trials: usize,
    pub power: f64,
    /// Trials whose statistic had a non-OK status and was recorded as 0.
    pub non_ok: usize,
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOutcome {
    pub value: f64,
    pub region: RejectionRegion,
    pub reject: bool,
}

fn min_count(got: usize, min: usize) -> Result<()> {
    if got < min {
        return Err(QccError::TooFewReplicates { got, min });
    }
    Ok(())
}

fn check_stats(stats: &[StatisticSpec], m: usize) -> Result<()> {
    if stats.is_empty() {
        return Err(QccError::InvalidParameter("no statistics given".into()));
    }
    for s in stats {
        let h = s.validated()?.lag();
        if m < h + 2 {
            return Err(QccError::SeriesTooShort { len: m, lag: h });
        }
    }
    Ok(())
}

/// Every statistic evaluated on one series.
fn evaluate_all(stats: &[StatisticSpec], v: &[f64]) -> Result<Vec<QccValue>> {
    stats.iter().map(|s| s.evaluate(v)).collect()
}

fn collect_nulls(
    rows: Vec<Vec<QccValue>>,
    stats: &[StatisticSpec],
    m: usize,
) -> Vec<NullDistribution> {
    (0..stats.len())
        .map(|j| {
            let mut non_ok = 0;
            let values = rows
                .iter()
                .map(|r| {
                    let v = r[j];
                    if v.status.is_ok() {
                        v.value
                    } else {
                        non_ok += 1;
                        0.0
                    }
                })
                .collect();
            NullDistribution::from_values(values, m, stats[j], non_ok)
        })
        .collect()
}

/// Null distributions of several statistics evaluated on the same `replicates`
/// null series of length `m`.
pub fn simulate_nulls(
    stats: &[StatisticSpec],
    null_sampler: &dyn SeriesSampler,
    m: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<NullDistribution>> {
    min_count(replicates, MIN_NULL_REPLICATES)?;
    check_stats(stats, m)?;
    let rows: Vec<Vec<QccValue>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let v = null_sampler.sample_series(m, &mut rng::replicate(seed, i as u64))?;
            evaluate_all(stats, &v)
        })
        .collect::<Result<_>>()?;
    Ok(collect_nulls(rows, stats, m))
}

pub fn simulate_null(
    stat: StatisticSpec,
    null_sampler: &dyn SeriesSampler,
    m: usize,
    replicates: usize,
    seed: u64,
) -> Result<NullDistribution> {
    Ok(simulate_nulls(&[stat], null_sampler, m, replicates, seed)?.remove(0))
}

/// `lo` and `hi` are the order statistics with indices `ceil(N alpha/2)` and
/// `ceil(N (1 - alpha/2))`.
pub fn rejection_region(nd: &NullDistribution, alpha: f64) -> Result<RejectionRegion> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(QccError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = nd.values.len();
    if (n as f64) * alpha / 2.0 < 2.0 {
        return Err(QccError::AlphaTooSmallForN { alpha, n });
    }
    let lo = ceil_index(n as f64 * alpha / 2.0).clamp(1, n);
    let hi = ceil_index(n as f64 * (1.0 - alpha / 2.0)).clamp(1, n);
    Ok(RejectionRegion {
        lo: nd.values[lo - 1],
        hi: nd.values[hi - 1],
        alpha,
    })
}

/// Evaluates the statistic and checks it against the region. A non-OK
/// estimator status is reported as an error.
pub fn run_test(series: &[f64], stat: StatisticSpec, region: &RejectionRegion) -> Result<TestOutcome> {
    let v = stat.evaluate(series)?;
    if !v.status.is_ok() {
        return Err(QccError::StatisticFailure(v.status));
    }
    Ok(TestOutcome {
        value: v.value,
        reject: region.rejects(v.value),
    })
}

/// Rejection rates of several (statistic, region) pairs on the same `trials`
/// alternative series.
pub fn estimate_power_many(
    alt_sampler: &dyn SeriesSampler,
    tests: &[(StatisticSpec, RejectionRegion)],
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<PowerResult>> {
    min_count(trials, MIN_POWER_TRIALS)?;
    let stats: Vec<StatisticSpec> = tests.iter().map(|t| t.0).collect();
    check_stats(&stats, m)?;
    let rows: Vec<Vec<QccValue>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let v = alt_sampler.sample_series(m, &mut rng::replicate(seed, i as u64))?;
            evaluate_all(&stats, &v)
        })
        .collect::<Result<_>>()?;
    Ok(tests
        .iter()
        .enumerate()
        .map(|(j, (stat, region))| {
            let (mut rejected, mut non_ok) = (0, 0);
            for r in &rows {
                let v = r[j];
                let value = if v.status.is_ok() {
                    v.value
                } else {
                    non_ok += 1;
                    0.0
                };
                rejected += usize::from(region.rejects(value));
            }
            PowerResult {
                statistic: *stat,
                rejected,
                trials,
                power: rejected as f64 / trials as f64,
                non_ok,
                m,
                seed,
            }
        })
        .collect())
}

pub fn estimate_power(
    alt_sampler: &dyn SeriesSampler,
    stat: StatisticSpec,
    region: &RejectionRegion,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<PowerResult> {
    Ok(estimate_power_many(alt_sampler, &[(stat, *region)], m, trials, seed)?.remove(0))
}

/// Parameters of a full Monte-Carlo power evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDesign {
    /// Series length.
    pub m: usize,
    /// Null replicates.
    pub n_null: usize,
    /// Alternative trials.
    pub m_trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Simulates the nulls, builds the regions and estimates the power of every
/// statistic. Null and alternative batches use unrelated child seeds.
pub fn power_study(
    null_sampler: &dyn SeriesSampler,
    alt_sampler: &dyn SeriesSampler,
    stats: &[StatisticSpec],
    design: &PowerDesign,
) -> Result<Vec<PowerResult>> {
    let nulls = simulate_nulls(
        stats,
        null_sampler,
        design.m,
        design.n_null,
        rng::derive(design.seed, label::NULL),
    )?;
    let tests = nulls
        .iter()
        .map(|nd| Ok((nd.statistic, rejection_region(nd, design.alpha)?)))
        .collect::<Result<Vec<_>>>()?;
    estimate_power_many(
        alt_sampler,
        &tests,
        design.m,
        design.m_trials,
        rng::derive(design.seed, label::ALTERNATIVE),
    )
}

fn resample(values: &[f64], rng: &mut SimRng) -> Vec<f64> {
    let m = values.len();
    (0..m).map(|_| values[rng.random_range(0..m)]).collect()
}

/// Null distributions of several statistics over the same `resamples`
/// with-replacement resamples of `series`.
pub fn bootstrap_nulls(
    series: &[f64],
    stats: &[StatisticSpec],
    resamples: usize,
    seed: u64,
) -> Result<Vec<NullDistribution>> {
    min_count(resamples, MIN_BOOTSTRAP_RESAMPLES)?;
    check_stats(stats, series.len())?;
    let rows: Vec<Vec<QccValue>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let v = resample(series, &mut rng::replicate(seed, b as u64));
            evaluate_all(stats, &v)
        })
        .collect::<Result<_>>()?;
    Ok(collect_nulls(rows, stats, series.len()))
}

pub fn bootstrap_null(
    series: &[f64],
    stat: StatisticSpec,
    resamples: usize,
    seed: u64,
) -> Result<NullDistribution> {
    Ok(bootstrap_nulls(series, &[stat], resamples, seed)?.remove(0))
}

pub fn bootstrap_test(
    series: &[f64],
    stat: StatisticSpec,
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<BootstrapOutcome> {
    let nd = bootstrap_null(series, stat, resamples, seed)?;
    let region = rejection_region(&nd, alpha)?;
    let t = run_test(series, stat, &region)?;
    Ok(BootstrapOutcome {
        value: t.value,
        region,
        reject: t.reject,
    })
}

/// Bootstrap verdicts of several statistics on one series. A statistic whose
/// value on the original series is degenerate counts as not rejecting.
pub fn bootstrap_verdicts(
    series: &[f64],
    stats: &[StatisticSpec],
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<bool>> {
    let nulls = bootstrap_nulls(series, stats, resamples, seed)?;
    stats
        .iter()
        .zip(&nulls)
        .map(|(s, nd)| {
            let region = rejection_region(nd, alpha)?;
            let v = s.evaluate(series)?;
            Ok(v.status.is_ok() && region.rejects(v.value))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub statistic: StatisticSpec,
    /// Fraction of series rejected.
    pub rejects: f64,
    /// Fraction rejected by this statistic but not by the squared-series
    /// autocorrelation; `None` for the unconditional statistics.
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub series: usize,
    pub alpha: f64,
    pub resamples: usize,
    pub rows: Vec<PanelRow>,
}

/// Bootstrap panel over many series: rejection fractions per statistic and,
/// for conditional statistics, the share rejected while the lag-`h`
/// squared-series autocorrelation test accepts.
pub fn bootstrap_panel(
    panel: &[Vec<f64>],
    stats: &[StatisticSpec],
    resamples: usize,
    alpha: f64,
    seed: u64,
) -> Result<Panel> {
    if panel.is_empty() {
        return Err(QccError::EmptySample);
    }
    // append any missing squared-ACF comparators
    let mut all = stats.to_vec();
    for s in stats {
        let sq = StatisticSpec::AutocorrSquared { h: s.lag() };
        if !all.contains(&sq) {
            all.push(sq);
        }
    }
    let verdicts: Vec<Vec<bool>> = panel
        .iter()
        .enumerate()
        .map(|(k, series)| {
            bootstrap_verdicts(series, &all, resamples, alpha, rng::derive(seed, k as u64))
        })
        .collect::<Result<_>>()?;
    let total = panel.len() as f64;
    let rows = stats
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let rejects = verdicts.iter().filter(|v| v[j]).count() as f64 / total;
            let u = match s {
                StatisticSpec::CondAutocorr { h, .. } => {
                    let sq = StatisticSpec::AutocorrSquared { h: *h };
                    let k = all.iter().position(|t| *t == sq).expect("comparator present");
                    Some(verdicts.iter().filter(|v| v[j] && !v[k]).count() as f64 / total)
                }
                _ => None,
            };
            PanelRow {
                statistic: *s,
                rejects,
                u,
            }
        })
        .collect();
    Ok(Panel {
        series: panel.len(),
        alpha,
        resamples,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, Ma1Params, NoiseSpec, ProcessSpec, SeriesModel};

    fn wn() -> ProcessSpec {
        ProcessSpec::clean(SeriesModel::GaussianWn).unwrap()
    }

    fn nd(values: Vec<f64>) -> NullDistribution {
        NullDistribution::from_values(values, 10, StatisticSpec::Autocorr { h: 1 }, 0)
    }

    fn std_of(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
    }

    #[test]
    fn statistic_text_forms() {
        let s: StatisticSpec = "cacf:1:0.01:0.99".parse().unwrap();
        assert_eq!(s, StatisticSpec::cond(1, 0.01, 0.99).unwrap());
        assert_eq!(s.label(), "rho_(0.01,0.99)(1)");
        assert_eq!(s.to_string(), "cacf:1:0.01:0.99");
        assert_eq!("acf:2".parse::<StatisticSpec>().unwrap().label(), "rho(2)");
        assert_eq!("acf2:1".parse::<StatisticSpec>().unwrap().label(), "rho(1)(x^2)");
        assert!("acf:0".parse::<StatisticSpec>().is_err());
        assert!("cacf:1:0.9:0.1".parse::<StatisticSpec>().is_err());
        assert!("pacf:1".parse::<StatisticSpec>().is_err());
    }

    #[test]
    fn region_index_arithmetic() {
        let d = nd((1..=100).rev().map(|i| i as f64 / 100.0).collect());
        let r = rejection_region(&d, 0.10).unwrap();
        assert_eq!((r.lo, r.hi), (0.05, 0.95));
        let d = nd((1..=1000).map(f64::from).collect());
        let r = rejection_region(&d, 0.05).unwrap();
        assert_eq!((r.lo, r.hi), (25.0, 975.0));
        assert!(d.values.contains(&r.lo) && d.values.contains(&r.hi));
        assert_eq!(
            rejection_region(&d, 0.003),
            Err(QccError::AlphaTooSmallForN { alpha: 0.003, n: 1000 })
        );
        assert!(rejection_region(&d, 0.0).is_err());
    }

    #[test]
    fn region_is_closed() {
        let r = RejectionRegion { lo: -0.1, hi: 0.1, alpha: 0.05 };
        assert!(!r.rejects(0.0) && !r.rejects(0.099));
        assert!(r.rejects(0.1) && r.rejects(-0.1) && r.rejects(0.5));
        let s = models::sample_gaussian_wn(100, 3);
        let stat = StatisticSpec::Autocorr { h: 1 };
        let v = stat.evaluate(&s).unwrap().value;
        let at = RejectionRegion { lo: -1.0, hi: v, alpha: 0.05 };
        assert!(run_test(&s, stat, &at).unwrap().reject);
        let flat = vec![1.0; 30];
        assert!(matches!(
            run_test(&flat, stat, &r),
            Err(QccError::StatisticFailure(_))
        ));
    }

    #[test]
    fn null_shapes() {
        let c = simulate_null(StatisticSpec::cond(1, 0.01, 0.99).unwrap(), &wn(), 1000, 1000, 1).unwrap();
        let (m, s) = std_of(&c.values);
        assert!(m.abs() < 0.01 && s > 0.01 && s < 0.2, "{m} {s}");
        assert!(c.values.windows(2).all(|w| w[0] <= w[1]));

        let a = simulate_null(StatisticSpec::Autocorr { h: 1 }, &wn(), 1000, 2000, 2).unwrap();
        let (_, s) = std_of(&a.values);
        assert!((s * 1000f64.sqrt() - 1.0).abs() < 0.15, "{s}");
        let r = rejection_region(&a, 0.05).unwrap();
        assert!((r.lo + r.hi).abs() < 0.2 * r.hi);
        assert!(simulate_null(StatisticSpec::Autocorr { h: 1 }, &wn(), 1000, 99, 2).is_err());
        assert!(simulate_null(StatisticSpec::Autocorr { h: 9 }, &wn(), 10, 100, 2).is_err());
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let stats = [StatisticSpec::cond(1, 0.05, 0.95).unwrap(), StatisticSpec::AutocorrSquared { h: 1 }];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let n = simulate_nulls(&stats, &wn(), 200, 300, 4).unwrap();
                    let s = models::sample_gaussian_wn(200, 5);
                    let b = bootstrap_nulls(&s, &stats, 300, 6).unwrap();
                    (n, b)
                })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn power_reduces_to_size_under_the_null() {
        let alt = ProcessSpec::new(
            SeriesModel::Ma1(Ma1Params { theta: 0.0 }),
            NoiseSpec::DiscreteJump { r: 15.0, p: 0.01 },
        )
        .unwrap();
        let design = PowerDesign { m: 500, n_null: 1000, m_trials: 1000, alpha: 0.05, seed: 7 };
        let stats = [StatisticSpec::cond(1, 0.01, 0.99).unwrap(), StatisticSpec::Autocorr { h: 1 }];
        for r in power_study(&alt, &alt, &stats, &design).unwrap() {
            assert!((r.power - 0.05).abs() < 0.02, "{r:?}");
            assert_eq!(r.trials, 1000);
        }
    }

    #[test]
    fn power_increases_with_theta() {
        let null = ProcessSpec::new(
            SeriesModel::Ma1(Ma1Params { theta: 0.0 }),
            NoiseSpec::DiscreteJump { r: 5.0, p: 0.05 },
        )
        .unwrap();
        let stats = [
            StatisticSpec::cond(1, 0.05, 0.95).unwrap(),
            StatisticSpec::Autocorr { h: 1 },
            StatisticSpec::AutocorrSquared { h: 1 },
        ];
        let design = PowerDesign { m: 300, n_null: 500, m_trials: 500, alpha: 0.05, seed: 8 };
        let powers: Vec<Vec<f64>> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&theta| {
                let alt = ProcessSpec::new(
                    SeriesModel::Ma1(Ma1Params { theta }),
                    NoiseSpec::DiscreteJump { r: 5.0, p: 0.05 },
                )
                .unwrap();
                power_study(&null, &alt, &stats, &design)
                    .unwrap()
                    .iter()
                    .map(|r| r.power)
                    .collect()
            })
            .collect();
        for j in 0..stats.len() {
            assert!(powers[1][j] >= powers[0][j] - 0.05, "{powers:?}");
            assert!(powers[2][j] >= powers[1][j] - 0.05, "{powers:?}");
        }
    }

    #[test]
    fn bootstrap_cases() {
        let s = models::sample_gaussian_wn(300, 9);
        let stat = StatisticSpec::cond(1, 0.05, 0.95).unwrap();
        assert_eq!(bootstrap_null(&s, stat, 200, 1).unwrap(), bootstrap_null(&s, stat, 200, 1).unwrap());
        assert!(bootstrap_null(&s, stat, 99, 1).is_err());

        let mut walk = vec![0.0f64];
        let noise = models::sample_gaussian_wn(300, 10);
        for e in &noise {
            let last = *walk.last().unwrap();
            walk.push(last + e);
        }
        let t = bootstrap_test(&walk, stat, 500, 0.05, 2).unwrap();
        assert!(t.reject && t.value > 0.9, "{t:?}");
    }

    #[test]
    fn panel_layout() {
        let panel: Vec<Vec<f64>> = (0..6).map(|k| models::sample_gaussian_wn(150, 100 + k)).collect();
        let stats = [StatisticSpec::Autocorr { h: 1 }, StatisticSpec::cond(1, 0.01, 0.65).unwrap()];
        let p = bootstrap_panel(&panel, &stats, 200, 0.05, 3).unwrap();
        assert_eq!(p.rows.len(), 2);
        assert_eq!(p.rows[0].u, None);
        let u = p.rows[1].u.unwrap();
        assert!(u <= p.rows[1].rejects && (0.0..=1.0).contains(&u));
        assert!(bootstrap_panel(&[], &stats, 200, 0.05, 3).is_err());
    }
}
