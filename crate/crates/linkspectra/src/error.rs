use std::path::PathBuf;

use serde_json::json;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] linkspectra_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: u64, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "invalid_data",
            CliError::Io { .. } => "io",
            CliError::Malformed { .. } => "malformed_record",
            CliError::Usage(_) => "usage",
            CliError::Format { .. } => "format",
            CliError::ChecksFailed(_) => "checks_failed",
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Malformed { path, line, .. } = self {
            v["path"] = json!(path);
            v["line"] = json!(line);
        }
        v
    }
}
