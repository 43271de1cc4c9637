use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller handed in something that violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Factorization or inversion failed.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("calibration error for class `{class}`: {reason}")]
    Calibration { class: String, reason: String },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("frame sequencing error: {0}")]
    Sequencing(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Wraps an error with the frame it occurred in.
    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_frame(self, frame: u64) -> Self {
        Error::AtFrame {
            frame,
            source: Box::new(self),
        }
    }

    /// Strips frame context and reports whether the root cause is numeric.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) => true,
            Error::AtFrame { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
