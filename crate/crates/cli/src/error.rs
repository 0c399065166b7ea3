//! CLI error taxonomy mapped onto process exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration parsing or validation problems (exit code 2).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure inside the toolkit (exit code 3).
    #[error("numerical failure: {0}")]
    Numerical(#[from] twinmon::Error),

    /// Filesystem trouble (exit code 4).
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
