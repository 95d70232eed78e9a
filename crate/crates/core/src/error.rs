use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by ingestion, index construction, querying, evaluation,
/// and persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv contains no data rows")]
    EmptyCsv,

    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}: invalid id {value:?}")]
    InvalidId { row: usize, value: String },

    #[error("row {row}, column {column}: invalid feature value {value:?}")]
    InvalidFeature {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("duplicate id {id} (rows {first_row} and {second_row})")]
    DuplicateId {
        id: u64,
        first_row: usize,
        second_row: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown id {0}")]
    UnknownId(u64),

    #[error("id {0} does not fit the index file's 32-bit id field")]
    IdTooLarge(u64),

    #[error("{path}: {reason}")]
    IndexFormat { path: PathBuf, reason: String },

    #[error("failed to {op} {path}: {source}")]
    Io {
        op: &'static str,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(op: &'static str, path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            op,
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::IndexFormat {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn param(reason: impl Into<String>) -> Self {
        Error::InvalidParameter(reason.into())
    }
}
