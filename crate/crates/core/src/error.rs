use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("reading input stream: {0}")]
    Stream(#[source] std::io::Error),

    #[error("conflicting identity overrides: {0}")]
    ConflictingOverride(String),

    #[error("{path}:{line}: {message}")]
    BadInputLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("person {0} is not a node of this network")]
    UnknownNode(u32),

    #[error("no networks to report on")]
    EmptyGrid,

    #[error("malformed report document {path}: {message}")]
    BadReport { path: PathBuf, message: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 2 for broken internal invariants,
    /// 1 for everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}
