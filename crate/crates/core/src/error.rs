use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("decision column `{0}` not found in header")]
    UnknownDecisionColumn(String),

    #[error("duplicate column name `{0}` in header")]
    DuplicateColumn(String),

    #[error("empty column name at position {0}")]
    EmptyColumnName(usize),

    #[error("line {line}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}, column `{column}`: missing value")]
    MissingValue { line: u64, column: String },

    #[error("line {line}: expected {expected} values, found {found}")]
    RowLength {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("split requests {requested} objects but the table holds {available}")]
    SplitTooLarge { requested: usize, available: usize },

    #[error("empty data")]
    EmptyData,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown attribute index {0}")]
    UnknownAttribute(usize),

    #[error("requested {requested} rules but only {available} distinct training points exist")]
    TooManyRules { requested: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
