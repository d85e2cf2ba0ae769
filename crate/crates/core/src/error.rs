//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("zero-norm column {0}: cosine distance is undefined")]
    ZeroNorm(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("pipeline step `{step}` failed: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// The pipeline step this error came from, if it was attributed to one.
    pub fn step(&self) -> Option<&'static str> {
        match self {
            Error::Step { step, .. } => Some(step),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
