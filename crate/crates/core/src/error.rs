use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("row {row}: expected {expected} features, found {found}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("row {row}, column {column}: non-numeric feature {value:?}")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}, column {column}: non-finite feature value")]
    NonFinite { row: usize, column: usize },

    #[error("contradictory labels at rows {first},{second}: identical coordinates with different classes")]
    ContradictoryLabels { first: usize, second: usize },

    #[error("label column: {0}")]
    LabelColumn(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("unknown class {0:?}")]
    UnknownClass(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} points, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("dataset has a single class; enable single-class mode to expand it")]
    SingleClass,

    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no point of another class exists")]
    NoForeignPoint,

    #[error("region has zero radius and contains no points")]
    ZeroRadius,

    #[error("degenerate fit: all densities are equal (beta = {beta})")]
    DegenerateFit { beta: f64 },

    #[error("oracle budget mismatch at point {index}: radius {radius} exceeds closed-form bound {bound}")]
    OracleBudget {
        index: usize,
        radius: f64,
        bound: f64,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
