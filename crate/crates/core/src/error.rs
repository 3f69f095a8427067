use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground truth has no foreground pixels")]
    NoForeground,

    #[error("no candidate region is larger than the minimum area ratio")]
    NoEligibleRegion,

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("invalid buffer: {0}")]
    InvalidBuffer(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("filename does not follow the COD10K naming pattern: {0}")]
    UnparsableFilename(String),

    #[error("ground truth is empty; recall is undefined")]
    EmptyGroundTruth,

    #[error("empty input")]
    EmptyInput,

    #[error("inconsistent class count: expected {expected}, got {actual}")]
    InconsistentClassCount { expected: usize, actual: usize },

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}

/// Failures raised by generator / discriminator backends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    /// Transport failure or timeout that persisted through every retry.
    #[error("backend unavailable: {0}")]
    Unavailable(String),

    /// The backend answered, but with something that violates the protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("scripted score sequence exhausted")]
    ScriptExhausted,
}
