use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("column `{column}` is not present in the header of {source_name}")]
    HeaderMismatch { column: String, source_name: String },
    #[error("no data rows in {0}")]
    EmptyInput(String),
    #[error("every row was dropped while removing incomplete rows ({0} rows read)")]
    AllRowsDropped(usize),
    #[error("category `{token}` in column `{column}` was not seen during training")]
    UnseenCategory { column: String, token: String },
    #[error("test ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("row selection is empty")]
    EmptySelection,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("column `{0}` holds a non-numeric or missing cell")]
    NonNumeric(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid soil sample at row {row}: {reason}")]
    InvalidSample { row: usize, reason: String },
    #[error("underdetermined system: {rows} rows for {features} features (need rows > features)")]
    Underdetermined { rows: usize, features: usize },
    #[error("least-squares system is rank deficient (rank {rank} of {features})")]
    SingularSystem { rank: usize, features: usize },
    #[error("ridge penalty must be nonnegative, got {0}")]
    NegativeLambda(f64),
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("target has zero variance, R² is undefined (every true value equals {0})")]
    ZeroVariance(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("nutrient counts have zero total")]
    ZeroTotal,
    #[error("invalid nutrient counts: nl + nm + nh = {sum} but nt = {total}")]
    InconsistentCounts { sum: u64, total: u64 },
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u64),
    #[error("model file violates schema: {0}")]
    SchemaViolation(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Underdetermined { .. }
            | Error::SingularSystem { .. }
            | Error::ZeroVariance(_)
            | Error::NonFinite => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Io,
            Error::Csv(e) if e.is_io_error() => ErrorClass::Io,
            _ => ErrorClass::Input,
        }
    }
}
