use thiserror::Error;

/// Errors produced by the library and surfaced by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has dimension zero")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid matrix entry ({row}, {col}): {reason}")]
    InvalidEntry {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("matrix is not regular: max row deviation {max_row_dev:e}, max column deviation {max_col_dev:e} (tolerance {tol:e})")]
    NotRegular {
        max_row_dev: f64,
        max_col_dev: f64,
        tol: f64,
    },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("no convergence: {message} (best estimate {best})")]
    Convergence { message: String, best: f64 },

    #[error("dimension {n} exceeds the dense cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("quasi-tree support exceeded {limit} vertices")]
    SupportLimit { limit: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. } => 3,
            Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
