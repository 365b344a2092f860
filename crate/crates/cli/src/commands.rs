use qcc_core::estimators::{cond_moments_on, qcc_bar};
use qcc_core::inference::{
    bootstrap_null, bootstrap_panel, rejection_region, run_test, simulate_null,
};
use qcc_core::models::{NoiseSpec, PairModel, PairSampler, ProcessSpec, SeriesModel, SeriesSampler};
use qcc_core::quantile::{rectangle_hat, Interval, QuantileSplit};
use qcc_core::rng::{self, label, SimRng};
use qcc_core::serial::{acf, cacf, null_bands, CorrelogramKind, Series};
use qcc_core::StatisticSpec;
use rand::Rng;
use serde_json::json;

use crate::config::{
    CacfConfig, EstimateConfig, InputRef, Kind, NullModel, PanelConfig, RunConfig, SeriesInput,
    SimModel, SimulateConfig, TestConfig, TestMode,
};
use crate::error::{CliError, Result};
use crate::input::{log_returns, read_columns, Source};
use crate::output::{self, num, Target};
use crate::power;

/// Runs a configuration. `pre` is the already loaded input of a fresh run; a
/// rerun passes `None` and the input is read again and checked by hash.
pub fn execute(run: &RunConfig, target: &Target, pre: Option<Source>) -> Result<()> {
    let mut pre = pre;
    let text = match run {
        RunConfig::Estimate(c) => estimate(run, c, &mut pre)?,
        RunConfig::Cacf(c) => correlogram(run, c, &mut pre)?,
        RunConfig::Test(c) => test(run, c, &mut pre)?,
        RunConfig::Simulate(c) => simulate(run, c)?,
        RunConfig::Panel(c) => panel(run, c, &mut pre)?,
        RunConfig::Power(p) if p.json => return power::run_json(&p.manifest, run, target),
        RunConfig::Power(p) => return power::run_csv(&p.manifest, run, target),
    };
    output::write(target, &text)
}

fn source(input: &InputRef, pre: &mut Option<Source>) -> Result<Source> {
    match pre.take() {
        Some(s) => Ok(s),
        None => input.reload(),
    }
}

fn load_series(si: &SeriesInput, pre: &mut Option<Source>) -> Result<Series> {
    let src = source(&si.input, pre)?;
    let cols = read_columns(&src, Some(&[si.column]))?;
    let values = if si.log_returns {
        log_returns(&src, &cols.columns[0], &cols.lines)?
    } else {
        cols.columns.into_iter().next().expect("one column selected")
    };
    Ok(Series::new(values)?)
}

fn split(s: (f64, f64)) -> Result<QuantileSplit> {
    Ok(QuantileSplit::new(s.0, s.1)?)
}

/// Sampler for a null model; `Resample` draws i.i.d. from `data`.
fn null_sampler<'a>(model: &NullModel, data: &'a [f64]) -> Result<Box<dyn SeriesSampler + 'a>> {
    Ok(match model {
        NullModel::Resample => Box::new(move |n: usize, r: &mut SimRng| -> qcc_core::Result<Vec<f64>> {
            Ok((0..n).map(|_| data[r.random_range(0..data.len())]).collect())
        }),
        NullModel::Process { model, noise } => {
            let m: SeriesModel = model.parse()?;
            let z: NoiseSpec = noise.parse()?;
            Box::new(ProcessSpec::new(m, z)?)
        }
    })
}

fn corners(i: Interval) -> serde_json::Value {
    if i.is_empty() {
        serde_json::Value::Null
    } else {
        json!([i.lo, i.hi])
    }
}

fn estimate(run: &RunConfig, c: &EstimateConfig, pre: &mut Option<Source>) -> Result<String> {
    let src = source(&c.input, pre)?;
    let cols = read_columns(&src, Some(&c.columns))?;
    let (x, y) = (&cols.columns[0], &cols.columns[1]);
    let rect = rectangle_hat(x, y, split(c.split_x)?, split(c.split_y)?)?;
    let moments = cond_moments_on(x, y, &rect)?;
    let v = qcc_bar(x, y, &rect)?;
    output::json_report(
        run,
        json!({
            "value": v.value,
            "status": v.status.as_str(),
            "n": x.len(),
            "count": moments.count,
            "corners": { "x": corners(rect.x), "y": corners(rect.y) },
        }),
    )
}

fn correlogram(run: &RunConfig, c: &CacfConfig, pre: &mut Option<Source>) -> Result<String> {
    let s = load_series(&c.series, pre)?;
    let sp = split(c.split)?;
    let (points, kind) = match c.kind {
        Kind::Cacf => (cacf(&s, c.max_lag, sp)?, CorrelogramKind::Conditional { split: sp }),
        Kind::Acf => (acf(&s, c.max_lag, false)?, CorrelogramKind::Plain),
        Kind::Acf2 => (acf(&s, c.max_lag, true)?, CorrelogramKind::Squared),
    };
    let bands = match &c.bands {
        Some(b) => {
            let sampler = null_sampler(&b.null_model, s.values())?;
            Some(null_bands(
                s.len(),
                c.max_lag,
                kind,
                sampler.as_ref(),
                b.n_null,
                b.alpha,
                rng::derive(b.seed, label::NULL),
            )?)
        }
        None => None,
    };
    let mut header = vec!["lag", "value", "status"];
    if bands.is_some() {
        header.extend(["band_lo", "band_hi"]);
    }
    let rows: Vec<Vec<String>> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![p.lag.to_string(), num(p.value), p.status.to_string()];
            if let Some(b) = &bands {
                r.extend([num(b[i].lo), num(b[i].hi)]);
            }
            r
        })
        .collect();
    output::csv_table(run, &header, &rows)
}

fn test(run: &RunConfig, c: &TestConfig, pre: &mut Option<Source>) -> Result<String> {
    let s = load_series(&c.series, pre)?;
    let stat: StatisticSpec = c.statistic.parse()?;
    let nd = match &c.mode {
        TestMode::Mc { null_model, n_null } => {
            let sampler = null_sampler(null_model, s.values())?;
            simulate_null(stat, sampler.as_ref(), s.len(), *n_null, rng::derive(c.seed, label::NULL))?
        }
        TestMode::Bootstrap { b_boot } => {
            bootstrap_null(s.values(), stat, *b_boot, rng::derive(c.seed, label::BOOTSTRAP))?
        }
    };
    let region = rejection_region(&nd, c.alpha)?;
    let t = run_test(s.values(), stat, &region)?;
    output::json_report(
        run,
        json!({
            "statistic": stat.to_string(),
            "label": stat.label(),
            "value": t.value,
            "lo": region.lo,
            "hi": region.hi,
            "reject": t.reject,
            "alpha": c.alpha,
            "null_size": nd.len(),
            "null_non_ok": nd.non_ok,
        }),
    )
}

fn simulate(run: &RunConfig, c: &SimulateConfig) -> Result<String> {
    if c.n == 0 {
        return Err(CliError::Invalid("--n must be at least 1".into()));
    }
    let mut r = rng::seeded(c.seed);
    match &c.model {
        SimModel::Series { model, noise } => {
            let spec = ProcessSpec::new(model.parse()?, noise.parse()?)?;
            let v = spec.sample_series(c.n, &mut r)?;
            let rows: Vec<Vec<String>> = v.iter().map(|&x| vec![num(x)]).collect();
            output::csv_table(run, &["x"], &rows)
        }
        SimModel::Pair { model } => {
            let m: PairModel = model.parse()?;
            let (x, y) = m.sample_pairs(c.n, &mut r)?;
            let rows: Vec<Vec<String>> =
                x.iter().zip(&y).map(|(&a, &b)| vec![num(a), num(b)]).collect();
            output::csv_table(run, &["x", "y"], &rows)
        }
    }
}

fn panel(run: &RunConfig, c: &PanelConfig, pre: &mut Option<Source>) -> Result<String> {
    let src = source(&c.input, pre)?;
    let cols = read_columns(&src, None)?;
    let panel: Vec<Vec<f64>> = if c.log_returns {
        cols.columns
            .iter()
            .map(|v| log_returns(&src, v, &cols.lines))
            .collect::<Result<_>>()?
    } else {
        cols.columns
    };
    let stats = c
        .statistics
        .iter()
        .map(|s| s.parse())
        .collect::<qcc_core::Result<Vec<StatisticSpec>>>()?;
    let p = bootstrap_panel(&panel, &stats, c.b_boot, c.alpha, c.seed)?;
    let rows: Vec<Vec<String>> = p
        .rows
        .iter()
        .map(|r| {
            vec![
                r.statistic.to_string(),
                r.statistic.label(),
                num(r.rejects),
                r.u.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    output::csv_table(run, &["statistic", "label", "rejects", "u"], &rows)
}
