use std::path::Path;

use thiserror::Error;

/// Failures surfaced by the CLI, grouped by exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Data(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

impl From<retropop_core::InputError> for Error {
    fn from(e: retropop_core::InputError) -> Self {
        Error::Data(e.to_string())
    }
}

impl From<crate::smf::SmfError> for Error {
    fn from(e: crate::smf::SmfError) -> Self {
        Error::Data(e.to_string())
    }
}
