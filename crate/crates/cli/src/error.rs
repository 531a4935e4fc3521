use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a successful run, or a validation run where every check passed.
pub const EXIT_OK: i32 = 0;
/// At least one validation check failed.
pub const EXIT_VALIDATION: i32 = 1;
/// Bad flags, config file or configuration values.
pub const EXIT_USAGE: i32 = 2;
/// Unreadable, unwritable or malformed files.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{0} validation check(s) failed")]
    ValidationFailed(usize),

    #[error(transparent)]
    Core(#[from] pig_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_IO,
            CliError::ValidationFailed(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                pig_core::Error::Config(_) | pig_core::Error::Domain { .. } => EXIT_USAGE,
                pig_core::Error::Data(_)
                | pig_core::Error::Grid(_)
                | pig_core::Error::UnsupportedRule => EXIT_IO,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
