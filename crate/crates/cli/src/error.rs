use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Not valid JSON.
    #[error("parse error: {0}")]
    Parse(String),
    /// Valid JSON with missing, unknown or mistyped keys.
    #[error("schema error: {0}")]
    Schema(String),
    /// Well-formed scenario with inadmissible values.
    #[error("validation error: {0}")]
    Validation(#[from] pelletctl_core::Error),
    #[error("sweep axis has no values")]
    EmptyAxis,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
