use std::path::PathBuf;

use qcc_core::QccError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{path}, line {line}: price {value} is not positive; log-returns need positive prices")]
    NonPositivePrice {
        path: PathBuf,
        line: u64,
        value: f64,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] QccError),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// `2` for bad input, `3` for failures while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(QccError::StatisticFailure(_)) | CliError::Output(_) => 3,
            _ => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
