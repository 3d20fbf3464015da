use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped so front ends can map them onto coarse failure
/// categories (configuration, data, numerics) with [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (expected < {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("neighbourhood size k={k} out of range 1..={k_max}")]
    KOutOfRange { k: usize, k_max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite covariate at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("exhaustive enumeration refused for n={n} (limit {limit})")]
    TooLargeForEnumeration { n: usize, limit: usize },

    #[error("perfect sampling requires exactly two classes, got {0}")]
    NotBinary(usize),

    #[error("query (beta={beta}, k={k}) lies outside the tabulated grid")]
    OutsideGrid { beta: f64, k: usize },

    #[error("grid rejected: slope of E[S] jumps by {jump:.4} at k={k}, beta={beta:.4}")]
    GridNotSmooth { k: usize, beta: f64, jump: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty chain: no post-burn-in draws")]
    EmptyChain,

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("unknown class label {0:?}")]
    UnknownLabel(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_)
            | Error::IndexOutOfRange { .. }
            | Error::KOutOfRange { .. }
            | Error::TooLargeForEnumeration { .. }
            | Error::NotBinary(_)
            | Error::OutsideGrid { .. } => ErrorCategory::Config,
            Error::SingularCovariance | Error::GridNotSmooth { .. } | Error::EmptyChain => {
                ErrorCategory::Numerical
            }
            _ => ErrorCategory::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
