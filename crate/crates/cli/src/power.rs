//! Power grids driven by a TOML manifest.
//!
//! ```toml
//! family = "ma1"            # or "garch"
//! statistics = ["cacf:1:0.01:0.99", "acf:1"]
//! m = 1000
//! n_null = 1000
//! m_trials = 1000
//! alpha = 0.05
//! seed = 7
//!
//! [[grid]]
//! theta = 0.5
//! noise = "jump:r=15,p=0.01"
//! ```
//!
//! GARCH grid points give `w0`, `w1`, `w2` instead of `theta`, and the
//! manifest may set `burn_in`. The null of every point is the same model with
//! its dependence removed: `theta = 0`, or i.i.d. draws from the GARCH
//! stationary law, with the same noise.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use qcc_core::inference::{power_study, PowerDesign, PowerResult};
use qcc_core::models::garch::DEFAULT_PATH_BURN_IN;
use qcc_core::models::{GarchParams, Ma1Params, NoiseSpec, ProcessSpec, SeriesModel};
use qcc_core::rng::{self, label};
use qcc_core::StatisticSpec;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{self, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ma1,
    Garch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w2: Option<f64>,
    #[serde(default = "no_noise")]
    pub noise: String,
}

fn no_noise() -> String {
    "none".into()
}

/// The manifest after validation and normalisation; this is what gets
/// recorded and digested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub family: Family,
    pub statistics: Vec<String>,
    pub m: usize,
    pub n_null: usize,
    pub m_trials: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub grid: Vec<GridPoint>,
}

/// Null and alternative processes of one grid point.
struct Cell {
    null: ProcessSpec,
    alt: ProcessSpec,
}

fn manifest_err(msg: impl Into<String>) -> CliError {
    CliError::Manifest(msg.into())
}

impl PowerConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: PowerConfig = toml::from_str(text).map_err(|e| manifest_err(e.to_string()))?;
        raw.normalised()
    }

    pub fn with_burn_in(mut self, burn_in: Option<usize>) -> Result<Self> {
        if burn_in.is_some() {
            self.burn_in = burn_in;
        }
        self.normalised()
    }

    /// Validates every field and rewrites model strings in canonical form.
    pub fn normalised(mut self) -> Result<Self> {
        if self.statistics.is_empty() {
            return Err(manifest_err("`statistics` is empty"));
        }
        self.statistics = self
            .statistics
            .iter()
            .map(|s| {
                s.parse::<StatisticSpec>()
                    .map(|v| v.to_string())
                    .map_err(|e| manifest_err(format!("statistic `{s}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(manifest_err(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.family == Family::Ma1 && self.burn_in.is_some() {
            return Err(manifest_err("`burn_in` only applies to the garch family"));
        }
        for (i, g) in self.grid.iter_mut().enumerate() {
            g.noise = g
                .noise
                .parse::<NoiseSpec>()
                .map(|n| n.to_string())
                .map_err(|e| manifest_err(format!("grid point {}: {e}", i + 1)))?;
        }
        for i in 0..self.grid.len() {
            self.cell(i)?;
        }
        Ok(self)
    }

    fn cell(&self, i: usize) -> Result<Cell> {
        let g = &self.grid[i];
        let at = |msg: String| manifest_err(format!("grid point {}: {msg}", i + 1));
        let noise: NoiseSpec = g.noise.parse().map_err(|e| at(format!("{e}")))?;
        let (null, alt) = match self.family {
            Family::Ma1 => {
                if g.w0.is_some() || g.w1.is_some() || g.w2.is_some() {
                    return Err(at("w0/w1/w2 are garch parameters".into()));
                }
                let theta = g.theta.ok_or_else(|| at("missing `theta`".into()))?;
                (
                    SeriesModel::Ma1(Ma1Params { theta: 0.0 }),
                    SeriesModel::Ma1(Ma1Params { theta }),
                )
            }
            Family::Garch => {
                if g.theta.is_some() {
                    return Err(at("`theta` is an ma1 parameter".into()));
                }
                let get = |v: Option<f64>, k: &str| v.ok_or_else(|| at(format!("missing `{k}`")));
                let p = GarchParams::new(
                    get(g.w0, "w0")?,
                    get(g.w1, "w1")?,
                    get(g.w2, "w2")?,
                    self.burn_in.unwrap_or(DEFAULT_PATH_BURN_IN),
                )
                .map_err(|e| at(e.to_string()))?;
                (SeriesModel::GarchIid(p), SeriesModel::Garch(p))
            }
        };
        Ok(Cell {
            null: ProcessSpec::new(null, noise).map_err(|e| at(e.to_string()))?,
            alt: ProcessSpec::new(alt, noise).map_err(|e| at(e.to_string()))?,
        })
    }

    fn stats(&self) -> Vec<StatisticSpec> {
        self.statistics
            .iter()
            .map(|s| s.parse().expect("normalised statistics parse"))
            .collect()
    }

    fn header(&self) -> Vec<String> {
        let params: &[&str] = match self.family {
            Family::Ma1 => &["noise", "theta"],
            Family::Garch => &["noise", "w0", "w1", "w2"],
        };
        params
            .iter()
            .map(|s| s.to_string())
            .chain(self.statistics.iter().cloned())
            .collect()
    }

    fn params(&self, g: &GridPoint) -> Vec<String> {
        let f = |v: Option<f64>| output::num(v.expect("validated grid point"));
        match self.family {
            Family::Ma1 => vec![g.noise.clone(), f(g.theta)],
            Family::Garch => vec![g.noise.clone(), f(g.w0), f(g.w1), f(g.w2)],
        }
    }

    fn evaluate(&self, i: usize) -> Result<Vec<PowerResult>> {
        let cell = self.cell(i)?;
        let design = PowerDesign {
            m: self.m,
            n_null: self.n_null,
            m_trials: self.m_trials,
            alpha: self.alpha,
            seed: rng::derive(self.seed, label::GRID + i as u64),
        };
        Ok(power_study(&cell.null, &cell.alt, &self.stats(), &design)?)
    }
}

fn csv_line(fields: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields)?;
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields is utf-8"))
}

/// Rows already present in a previous, interrupted run with the same digest.
fn completed_rows(path: &Path, run: &RunConfig, grid: usize) -> Result<Option<usize>> {
    let text = match fs::read_to_string(path) {
        Ok(t) if !t.is_empty() => t,
        Ok(_) => return Ok(None),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let digest = format!("# digest: {}", run.digest());
    if !text.lines().any(|l| l == digest) {
        return Err(CliError::Invalid(format!(
            "{} exists and was produced by a different configuration; remove it or choose another output",
            path.display()
        )));
    }
    // count complete lines only, a torn final row is rewritten
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let complete = if text.ends_with('\n') { body.len() } else { body.len().saturating_sub(1) };
    let rows = complete.saturating_sub(1);
    if rows > grid {
        return Err(CliError::Invalid(format!(
            "{} has {rows} rows but the grid has {grid} points",
            path.display()
        )));
    }
    Ok(Some(rows))
}

/// Runs the grid as CSV, resuming a partial file at `target` when possible.
pub fn run_csv(cfg: &PowerConfig, run: &RunConfig, target: &Target) -> Result<()> {
    let fresh = format!("{}{}", run.csv_preamble(), csv_line(&cfg.header())?);
    match target {
        Target::Stdout => {
            let mut out = std::io::stdout().lock();
            out.write_all(fresh.as_bytes()).map_err(|e| output::err(target, e))?;
            append_rows(cfg, 0, &mut out, target)
        }
        Target::File(path) => {
            let start = match completed_rows(path, run, cfg.grid.len())? {
                Some(rows) => {
                    // drop a torn final line before appending
                    let old = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    let keep: String =
                        old.split_inclusive('\n').filter(|l| l.ends_with('\n')).collect();
                    if keep.lines().all(|l| l.starts_with('#')) {
                        fs::write(path, &fresh).map_err(|e| CliError::io(path, e))?;
                        0
                    } else {
                        fs::write(path, keep).map_err(|e| CliError::io(path, e))?;
                        rows
                    }
                }
                None => {
                    fs::write(path, &fresh).map_err(|e| CliError::io(path, e))?;
                    0
                }
            };
            if start > 0 {
                eprintln!("qcc: resuming {} after {start} completed grid points", path.display());
            }
            let mut f = OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|e| CliError::io(path, e))?;
            append_rows(cfg, start, &mut f, target)
        }
    }
}

fn append_rows(cfg: &PowerConfig, start: usize, out: &mut dyn Write, target: &Target) -> Result<()> {
    for i in start..cfg.grid.len() {
        let results = cfg.evaluate(i)?;
        let mut fields = cfg.params(&cfg.grid[i]);
        fields.extend(results.iter().map(|r| output::num(r.power)));
        let line = csv_line(&fields)?;
        out.write_all(line.as_bytes()).map_err(|e| output::err(target, e))?;
        out.flush().map_err(|e| output::err(target, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    #[serde(flatten)]
    point: &'a GridPoint,
    results: Vec<PowerResult>,
}

/// Runs the grid and writes one JSON document with full per-statistic results.
pub fn run_json(cfg: &PowerConfig, run: &RunConfig, target: &Target) -> Result<()> {
    let rows = (0..cfg.grid.len())
        .map(|i| {
            Ok(JsonRow {
                point: &cfg.grid[i],
                results: cfg.evaluate(i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = serde_json::json!({
        "rows": rows,
        "config": serde_json::to_value(run)?,
        "digest": run.digest(),
    });
    output::write(target, &output::json(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MA1: &str = r#"
family = "ma1"
statistics = ["cacf:1:0.01:0.99", "acf:1"]
m = 200
n_null = 200
m_trials = 100
alpha = 0.05
seed = 7

[[grid]]
theta = 0.9
noise = "jump:r=10,p=0.01"
"#;

    #[test]
    fn manifest_is_normalised() {
        let cfg = PowerConfig::from_toml(MA1).unwrap();
        assert_eq!(cfg.grid[0].noise, "jump:r=10,p=0.01");
        assert_eq!(cfg.header(), ["noise", "theta", "cacf:1:0.01:0.99", "acf:1"]);
        assert_eq!(cfg.params(&cfg.grid[0]), ["jump:r=10,p=0.01", "0.9"]);
    }

    #[test]
    fn manifest_errors() {
        let bad = |from: &str, to: &str| PowerConfig::from_toml(&MA1.replace(from, to)).is_err();
        assert!(bad("theta = 0.9", "w1 = 0.2"));
        assert!(bad("\"ma1\"", "\"arma\""));
        assert!(bad("alpha = 0.05", "alpha = 1.5"));
        assert!(bad("\"acf:1\"", "\"acf:0\""));
        assert!(bad("seed = 7", "seed = 7\nextra = 1"));
        assert!(bad("p=0.01", "p=0.7"));
        let garch = MA1
            .replace("\"ma1\"", "\"garch\"")
            .replace("theta = 0.9", "w0 = 0.001\nw1 = 0.7\nw2 = 0.4");
        assert!(PowerConfig::from_toml(&garch).is_err());
    }

    #[test]
    fn strong_dependence_is_detected() {
        let cfg = PowerConfig::from_toml(MA1).unwrap();
        let r = cfg.evaluate(0).unwrap();
        assert!(r[0].power > 0.9, "{:?}", r[0]);
    }
}
