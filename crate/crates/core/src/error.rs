use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("velocity {v} m/s below singularity floor {floor} m/s")]
    Singularity { v: f64, floor: f64 },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown data sample id {0} (expected 1, 2 or 3)")]
    UnknownSample(u8),

    #[error("channel {channel} has zero variance")]
    ZeroVariance { channel: usize },

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("at t = {t:.3} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// Coarse failure class, used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Io,
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::AtTime { source, .. } | Error::Context { source, .. } => source.class(),
            Error::Singularity { .. }
            | Error::NonFinite { .. }
            | Error::DimensionMismatch { .. }
            | Error::ZeroVariance { .. }
            | Error::GridMismatch(_) => ErrorClass::Numeric,
            Error::UnknownSample(_) | Error::Config(_) => ErrorClass::Config,
            Error::Io { .. } | Error::Format { .. } => ErrorClass::Io,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
