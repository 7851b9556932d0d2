//! File formats for `zeroset-core` data: sample clouds, manifold
//! descriptors, projection traces and fidelity reports as JSON, point lists
//! as CSV. The `zeroset` binary builds on these.

use std::io;
use std::path::Path;

pub mod config;
pub mod formats;
pub mod json;
pub mod points;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] zeroset_core::Error),
}

impl FormatError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        FormatError::Csv { path: path.display().to_string(), source }
    }
}
