use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("component index {index} out of range for {components} components")]
    ComponentOutOfRange { index: usize, components: usize },

    #[error("zero direction")]
    ZeroDirection,

    #[error("zero seed")]
    ZeroSeed,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("exact Hessian-vector products are unsupported for this objective")]
    UnsupportedHvp,

    #[error("numerically singular T")]
    SingularTridiagonal,

    #[error("not a descent direction")]
    NotDescent,

    #[error("unknown {what} `{value}`")]
    Unknown { what: &'static str, value: String },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
