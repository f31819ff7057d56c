use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph code {code:?}: {reason}")]
    InvalidCode { code: String, reason: String },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix is not square: {rows} rows, row {bad_row} has {cols} entries")]
    NotSquare {
        rows: usize,
        bad_row: usize,
        cols: usize,
    },

    #[error("graph {code} is not embeddable: {reason}")]
    NotEmbeddable { code: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("sample set is empty")]
    EmptySamples,

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

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } => false,
            Error::Csv(e) => !e.is_io_error(),
            Error::Json(e) => !e.is_io(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
