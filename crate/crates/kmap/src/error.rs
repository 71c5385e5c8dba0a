//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by estimation, probing, classification, corpus
/// management, and benchmarking.
#[derive(Debug, Error)]
pub enum Error {
    /// Input was empty where at least one byte is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Estimator id is reserved or has no registered implementation.
    #[error("unknown estimator {id}; known ids: {known}")]
    UnknownEstimator { id: String, known: String },

    /// Negative or non-finite description length.
    #[error("invalid description length: {0}")]
    InvalidLength(f64),

    /// A configuration field is out of range or inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Model feature schema does not match the supplied features.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// A group had too few samples to train or split.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// Pooled covariance stayed singular after regularization.
    #[error("degenerate features: {0}")]
    DegenerateFeatures(String),

    /// Name does not parse as a semantic type.
    #[error("unknown semantic type: {0}")]
    UnknownType(String),

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Splice span falls outside the container.
    #[error("invalid span: {0}")]
    InvalidSpan(String),

    /// Synthetic generator spec is invalid.
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    /// Operation not supported by the named estimator.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Compressed data failed to decode.
    #[error("corrupt stream: {0}")]
    CorruptStream(String),

    /// Model or report file failed to parse or validate.
    #[error("invalid file {path}: {reason}")]
    InvalidFile { path: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
