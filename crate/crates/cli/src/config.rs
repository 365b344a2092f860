//! Run configurations and their digests.
//!
//! Every output starts with the configuration that produced it (as a
//! `# config:` comment line for CSV, a `config` field for JSON) plus the
//! SHA-256 of its canonical JSON form. `qcc rerun` reads both back.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::input::Source;
use crate::power::PowerConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An input file together with the hash of the bytes that were read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputRef {
    pub fn of(src: &Source) -> Self {
        Self {
            path: src.path.clone(),
            sha256: src.sha256(),
        }
    }

    /// Loads the file again, failing if its content changed since the run.
    pub fn reload(&self) -> Result<Source> {
        let src = Source::load(&self.path)?;
        let now = src.sha256();
        if now != self.sha256 {
            return Err(CliError::Invalid(format!(
                "{}: content changed since the recorded run (sha256 {} != {})",
                self.path.display(),
                now,
                self.sha256
            )));
        }
        Ok(src)
    }
}

/// How a univariate series is pulled out of a CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInput {
    pub input: InputRef,
    pub column: isize,
    pub log_returns: bool,
}

/// Null model for Monte-Carlo bands and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NullModel {
    /// I.i.d. draws with replacement from the observed series.
    Resample,
    /// A parametric model, in its text form, plus optional noise.
    Process { model: String, noise: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub input: InputRef,
    pub columns: [isize; 2],
    pub split_x: (f64, f64),
    pub split_y: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub n_null: usize,
    pub alpha: f64,
    pub seed: u64,
    pub null_model: NullModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cacf,
    Acf,
    Acf2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacfConfig {
    pub series: SeriesInput,
    pub kind: Kind,
    pub max_lag: usize,
    pub split: (f64, f64),
    pub bands: Option<BandConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TestMode {
    Mc { null_model: NullModel, n_null: usize },
    Bootstrap { b_boot: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub series: SeriesInput,
    pub statistic: String,
    pub mode: TestMode,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimModel {
    Series { model: String, noise: String },
    Pair { model: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub model: SimModel,
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelConfig {
    pub input: InputRef,
    pub log_returns: bool,
    pub statistics: Vec<String>,
    pub b_boot: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// A power grid plus its output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRun {
    pub json: bool,
    pub manifest: PowerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Estimate(EstimateConfig),
    Cacf(CacfConfig),
    Test(TestConfig),
    Power(PowerRun),
    Simulate(SimulateConfig),
    Panel(PanelConfig),
}

impl RunConfig {
    /// Compact JSON with object keys in sorted order.
    pub fn canonical(&self) -> String {
        let value = serde_json::to_value(self).expect("configs always serialize");
        serde_json::to_string(&value).expect("values always serialize")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Comment block that heads every CSV output.
    pub fn csv_preamble(&self) -> String {
        format!(
            "# qcc {VERSION}\n# config: {}\n# digest: {}\n",
            self.canonical(),
            self.digest()
        )
    }
}

/// Recovers the configuration recorded in a previous output and checks it
/// against the recorded digest.
pub fn recorded(path: &Path) -> Result<RunConfig> {
    let src = Source::load(path)?;
    let text = String::from_utf8_lossy(&src.bytes);
    let bad = |msg: &str| CliError::Invalid(format!("{}: {msg}", path.display()));

    let (config, digest) = if text.trim_start().starts_with('{') {
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| bad(&format!("not a qcc JSON result: {e}")))?;
        let config = doc.get("config").ok_or_else(|| bad("no `config` field"))?.clone();
        let digest = doc
            .get("digest")
            .and_then(|d| d.as_str())
            .ok_or_else(|| bad("no `digest` field"))?
            .to_owned();
        (config, digest)
    } else {
        let mut config = None;
        let mut digest = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some(c) = line.strip_prefix("# config: ") {
                config = Some(c);
            } else if let Some(d) = line.strip_prefix("# digest: ") {
                digest = Some(d.trim().to_owned());
            }
        }
        let config = config.ok_or_else(|| bad("no `# config:` line"))?;
        let config: serde_json::Value =
            serde_json::from_str(config).map_err(|e| bad(&format!("unreadable config: {e}")))?;
        (config, digest.ok_or_else(|| bad("no `# digest:` line"))?)
    };

    let cfg: RunConfig =
        serde_json::from_value(config).map_err(|e| bad(&format!("unreadable config: {e}")))?;
    if cfg.digest() != digest {
        return Err(bad("recorded digest does not match the recorded config"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim() -> RunConfig {
        RunConfig::Simulate(SimulateConfig {
            model: SimModel::Series {
                model: "wn".into(),
                noise: "none".into(),
            },
            n: 10,
            seed: 3,
        })
    }

    #[test]
    fn canonical_form_is_sorted_and_stable() {
        let c = sim().canonical();
        assert_eq!(
            c,
            r#"{"command":"simulate","model":{"kind":"series","model":"wn","noise":"none"},"n":10,"seed":3}"#
        );
        let back: RunConfig = serde_json::from_str(&c).unwrap();
        assert_eq!(back, sim());
        assert_eq!(back.digest(), sim().digest());
        assert_eq!(sim().digest().len(), 64);
    }

    #[test]
    fn recorded_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        std::fs::write(&p, format!("{}x\n1\n", sim().csv_preamble())).unwrap();
        assert_eq!(recorded(&p).unwrap(), sim());

        let tampered = sim().csv_preamble().replace("\"n\":10", "\"n\":11");
        std::fs::write(&p, tampered).unwrap();
        assert!(recorded(&p).is_err());
    }
}
