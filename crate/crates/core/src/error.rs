use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column:?}: non-finite value {value:?}")]
    NonFinite {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("row {row}: invalid outlier label {value:?} (expected 0/1, true/false or inlier/outlier)")]
    InvalidLabel { row: usize, value: String },

    #[error("empty data: {0}")]
    Empty(String),

    #[error("ragged input: row {row} has {found} values, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("dimension mismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("projected bucket id out of the signed 64-bit range (value {0})")]
    BucketOverflow(f64),

    #[error("{0}")]
    Undefined(String),

    #[error("model file version error: {0}")]
    ModelVersion(String),

    #[error("model file truncated or malformed: {0}")]
    ModelTruncated(String),

    #[error("model checksum mismatch: stored {stored}, computed {computed}")]
    ModelChecksum { stored: String, computed: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
