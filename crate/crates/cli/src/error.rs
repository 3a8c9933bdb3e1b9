use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] keyshare::Error),

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: keyshare::Error },

    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },

    #[error("invalid `{field}`: {reason}")]
    Usage { field: &'static str, reason: String },

    #[error("{0} verification check(s) failed")]
    Verify(usize),
}

impl CliError {
    pub fn usage(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Usage { field, reason: reason.into() }
    }

    /// 1 for bad input, 2 for a failed computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 1,
            CliError::Input { source, .. } => match source {
                keyshare::Error::Io(_) => 1,
                e if e.is_validation() => 1,
                _ => 2,
            },
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) | CliError::Output { .. } | CliError::Verify(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
