use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model/network/experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse (mismatched shapes, stale tapes, short paths).
    #[error("usage error: {0}")]
    Usage(String),

    /// Numerical failure (singular innovation covariance, non-finite values).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Training loss became non-finite with early stopping disabled.
    #[error("training diverged at epoch {epoch}, minibatch {batch}: {detail}")]
    TrainingDiverged {
        epoch: usize,
        batch: usize,
        detail: String,
    },

    /// Relative-error normalizer is zero.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Stored file carries an unsupported format version.
    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    /// Stored file failed its integrity check.
    #[error("checksum mismatch: {0}")]
    ChecksumMismatch(String),

    /// Stored file is internally inconsistent (block shapes, counts).
    #[error("stored shape inconsistency: {0}")]
    StoredShape(String),

    /// Cached artifact does not match the requesting configuration.
    #[error("stale cache entry: {0}")]
    StaleCache(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
