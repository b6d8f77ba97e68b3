use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genome shape: {0}")]
    InvalidShape(String),

    #[error("invalid genome: {0}")]
    InvalidGenome(String),

    #[error("non-finite value at node {node} (pre-activation {pre})")]
    NonFiniteNode { node: usize, pre: f64 },

    #[error("non-finite {what}: {detail}")]
    NonFinite { what: &'static str, detail: String },

    #[error("length mismatch in {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("all {0} individuals diverged")]
    TotalDivergence(usize),

    #[error("dataset error: {0}")]
    Data(String),

    #[error("{path}: row {row}, column '{column}': cannot parse '{value}' as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("dataset '{name}' could not be fetched from {url}: {reason}")]
    Fetch { name: String, url: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
