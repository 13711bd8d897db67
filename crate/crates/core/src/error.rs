use std::path::PathBuf;

/// Errors produced anywhere in the receiver chain.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("equalizer diverged at symbol {symbol} (tap energy {energy:.3e})")]
    Diverged { symbol: usize, energy: f64 },

    #[error("timing loop lost lock: {0}")]
    LossOfLock(String),

    #[error("timing error detector {ted} has a non-restoring S-curve (slope {slope:.3e} at the lock point)")]
    LoopSign { ted: String, slope: f64 },

    #[error("rate mismatch: capture declares {capture} Hz, configuration expects {expected} Hz")]
    RateMismatch { capture: f64, expected: f64 },

    #[error("truncated payload {path}: {len} bytes is not a multiple of {unit}")]
    Truncated { path: PathBuf, len: u64, unit: u64 },

    #[error("malformed sidecar {path}: {reason}")]
    MalformedSidecar { path: PathBuf, reason: String },

    #[error("non-finite value in payload {path} at sample {index}")]
    NonFinitePayload { path: PathBuf, index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::LossOfLock(_) | Error::LoopSign { .. } => 3,
            Error::Io { .. }
            | Error::Truncated { .. }
            | Error::MalformedSidecar { .. }
            | Error::NonFinitePayload { .. } => 4,
            _ => 2,
        }
    }
}
