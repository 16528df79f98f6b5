use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("ragged rows: row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric cell {value:?} at row {row}, column {col}")]
    NonNumericCell {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("need at least {required} samples, got {found}")]
    InsufficientSamples { required: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimensionality {0} exceeds the supported maximum of {max}", max = crate::linalg::MAX_DIM)]
    DimensionTooLarge(usize),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("vech length {found} does not match order {order} (expected {expected})")]
    LengthMismatch {
        order: usize,
        expected: usize,
        found: usize,
    },

    #[error("cannot reduce an empty array")]
    EmptyArray,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("plugin selector requires univariate data, got d = {0}")]
    NotUnivariate(usize),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("optimizer found no positive-definite bandwidth matrix")]
    NoFeasiblePoint,

    #[error(
        "pairwise buffer for n = {n} needs {required} bytes, over the {budget} byte budget; \
         use the fused evaluation path instead"
    )]
    BufferTooLarge {
        n: usize,
        required: u64,
        budget: u64,
    },

    #[error("invalid range: lower bound {lo} exceeds upper bound {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("estimated count over the range is effectively zero")]
    EmptyRangeEstimate,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
