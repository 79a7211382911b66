use std::path::PathBuf;

/// Errors produced by the clustering pipeline and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A file could not be read or written.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A text file was malformed.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An internal invariant did not hold. Indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }

    /// Process exit code for this error: 1 validation or malformed input, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse { .. } => 1,
            Error::Io { .. } => 2,
            Error::Internal(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
