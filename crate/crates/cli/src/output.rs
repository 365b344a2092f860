use std::io::Write;
use std::path::PathBuf;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub enum Target {
    Stdout,
    File(PathBuf),
}

impl Target {
    pub fn new(path: Option<PathBuf>) -> Self {
        match path {
            Some(p) if p != PathBuf::from("-") => Target::File(p),
            _ => Target::Stdout,
        }
    }
}

pub fn err(target: &Target, e: std::io::Error) -> CliError {
    match target {
        Target::Stdout => CliError::Output(format!("stdout: {e}")),
        Target::File(p) => CliError::io(p, e),
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write(target: &Target, text: &str) -> Result<()> {
    match target {
        Target::Stdout => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| err(target, e))
        }
        Target::File(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
    }
}

pub fn json(doc: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

/// Adds the run's config and digest to a JSON report.
pub fn json_report(run: &RunConfig, mut doc: serde_json::Value) -> Result<String> {
    let obj = doc.as_object_mut().expect("reports are JSON objects");
    obj.insert("config".into(), serde_json::to_value(run)?);
    obj.insert("digest".into(), run.digest().into());
    json(&doc)
}

/// Preamble, header row and data rows, with CSV quoting where needed.
pub fn csv_table(run: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    let mut s = run.csv_preamble();
    s.push_str(std::str::from_utf8(&body).expect("csv of utf-8 fields is utf-8"));
    Ok(s)
}
