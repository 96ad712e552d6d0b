use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample request")]
    EmptySampleRequest,

    #[error("invalid temperature: {0} (must be > 0)")]
    InvalidTemperature(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid hypothesis space: {0}")]
    InvalidSpace(String),

    #[error("hypothesis index {index} out of range for space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("hypothesis space mismatch: {left} vs {right}")]
    SpaceMismatch { left: usize, right: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid utility: {0}")]
    InvalidUtility(String),

    #[error("symmetrize first: matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("cost matrix too large: |Y| = {size} exceeds limit {limit}")]
    CostTooLarge { size: usize, limit: usize },

    #[error("support too large for brute-force oracle: {rows}x{cols} (limit 6x6)")]
    SupportTooLarge { rows: usize, cols: usize },

    #[error("delta must be in (0,1), got {0}")]
    InvalidDelta(f64),

    #[error("missing input: requires {0}")]
    MissingInput(&'static str),

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Attach a file path to errors raised while interpreting that file's contents.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::File { .. } | Error::Parse { .. }) => e,
            other => Error::File {
                path: path.into(),
                message: other.to_string(),
            },
        }
    }

    /// True for errors caused by user input (bad config, bad files, bad
    /// parameters) rather than internal failures.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Solver(_) | Error::Io(_))
    }
}
