use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image decode failed for {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("color-name table: {0}")]
    CnTable(String),
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("invalid samples: {0}")]
    Samples(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("sequence: {0}")]
    Sequence(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end:
    /// 1 usage, 2 data, 3 internal numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}
