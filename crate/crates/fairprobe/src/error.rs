use std::path::PathBuf;

use fairprobe_core::ModelError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fairprobe_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Missing or duplicated CSV column.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("bound error at row {row}, column `{column}`: {value} outside [{min}, {max}]")]
    Bound {
        row: usize,
        column: String,
        value: i64,
        min: i64,
        max: i64,
    },

    /// Malformed domain, model or report file.
    #[error("format error: {0}")]
    Format(String),

    #[error("{what} digest mismatch: expected {expected}, found {found}")]
    DigestMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 2 for usage and configuration
    /// problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(fairprobe_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}

impl From<ModelError> for Error {
    fn from(e: ModelError) -> Self {
        Error::Core(e.into())
    }
}
