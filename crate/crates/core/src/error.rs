use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported audio format: {0}")]
    Format(String),

    #[error("sample {index} out of 16-bit range: {value}")]
    Range { index: usize, value: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("profile mismatch: {0}")]
    Version(String),

    #[error("descriptor error: {0}")]
    Descriptor(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
