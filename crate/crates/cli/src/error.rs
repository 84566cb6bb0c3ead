use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid input: {0}")]
    Input(spectral_sens::Error),

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{}", .0)]
    Math(#[from] spectral_sens::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(_) => 1,
            _ => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "read",
            CliError::Parse { .. } => "parse",
            CliError::Input(e) | CliError::Math(e) => e.code(),
            CliError::Write(_) | CliError::Csv(_) => "write",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
