use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QaoaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QaoaError {
    #[error("{what} has {n} qubits, limit is {max}")]
    SizeLimit { what: &'static str, n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {field}: {reason}")]
    InvalidGraph { field: String, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("no connected sample after {attempts} attempts (n={n}, edge_prob={edge_prob})")]
    Disconnected { n: usize, edge_prob: f64, attempts: u64 },

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("malformed {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl QaoaError {
    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            QaoaError::SizeLimit { .. }
                | QaoaError::DimensionMismatch { .. }
                | QaoaError::InvalidGraph { .. }
                | QaoaError::InvalidParams(_)
                | QaoaError::InvalidArgument(_)
                | QaoaError::InvalidScheme(_)
                | QaoaError::InvalidConfig(_)
                | QaoaError::Parse { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QaoaError::Io { path: path.into(), source }
    }

    pub(crate) fn graph(field: impl Into<String>, reason: impl Into<String>) -> Self {
        QaoaError::InvalidGraph { field: field.into(), reason: reason.into() }
    }
}
