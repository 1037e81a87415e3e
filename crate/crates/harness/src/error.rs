use std::path::PathBuf;

use diazoir::{ComboTableError, FeaturizeError};
use diazoir_learn::LearnError;
use thiserror::Error;

use crate::dataset::RowIssue;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Ingest(RowIssue),
    #[error("no usable rows in {0}")]
    NoRows(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("combo table: {0}")]
    ComboTable(#[from] ComboTableError),
    #[error(transparent)]
    Featurize(#[from] FeaturizeError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too few rows: need at least {need}, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("{0}")]
    Invalid(String),
}

impl HarnessError {
    /// 2 for unreadable or malformed input and output files, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Format { .. } | HarnessError::Ingest(_) | HarnessError::NoRows(_) => 2,
            HarnessError::ComboTable(ComboTableError::Io(_)) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::Format { path: path.into(), message: message.to_string() }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
