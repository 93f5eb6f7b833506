use std::path::PathBuf;

use crate::measures::Group;

/// Errors raised across ingestion, transport, repair and auditing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty protected class: group {0} has no rows")]
    EmptyGroup(Group),

    #[error("measure must contain at least one point")]
    EmptyMeasure,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("coupling marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("transport problem with {rows}x{cols} cost entries is too large for the exact solver")]
    ProblemTooLarge { rows: usize, cols: usize },

    #[error("network simplex did not terminate within {0} pivots")]
    SolverStalled(usize),

    #[error("repair amount lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("degenerate classifier: no positive predictions in group {0}")]
    DegenerateClassifier(Group),

    #[error("labels are required for this operation")]
    MissingLabels,

    #[error("support of size {size} exceeds the exhaustive limit of {max}")]
    SupportTooLarge { size: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("logistic fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("column `{column}` has unmapped value `{value}` (line {line})")]
    UnmappedValue {
        column: String,
        value: String,
        line: u64,
    },

    #[error("column `{column}` has non-numeric value `{value}` (line {line})")]
    NonNumeric {
        column: String,
        value: String,
        line: u64,
    },

    #[error("missing value in column `{column}` (line {line})")]
    MissingValue { column: String, line: u64 },

    #[error("schema: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
