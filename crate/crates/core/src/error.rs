use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("csv row {row}, column '{column}': {message}")]
    CsvCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("csv: {0}")]
    CsvFormat(String),

    #[error("need at least two classes, found {0}")]
    SingleClass(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("weight vector length {got} does not match subset size {expected}")]
    WeightMismatch { expected: usize, got: usize },

    #[error("weights must not be all zero")]
    AllZeroWeights,

    #[error("learner kind '{0}' does not support gradient steps")]
    NonDifferentiable(String),

    #[error("exact valuation needs n <= {max}, got {n}")]
    ExactTooLarge { n: usize, max: usize },

    #[error("learner produced different parameters across identical fits")]
    NondeterministicLearner,

    #[error("dataset has no group assignment")]
    MissingGroups,

    #[error("no source with positive value")]
    NoPositiveValues,

    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
