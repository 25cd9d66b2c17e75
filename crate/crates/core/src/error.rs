use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate direction: gap norm {norm:e} below threshold")]
    DegenerateDirection { norm: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value encountered: {0}")]
    NumericalOverflow(String),

    #[error("invalid shard {shard} (objective has {count} shards)")]
    InvalidShard { shard: usize, count: usize },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("objective is not a classifier")]
    NotClassifier,

    #[error("valley boundary not found along direction {direction} within {max_steps} steps")]
    BoundaryNotFound { direction: usize, max_steps: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("layer segment `{0}` has zero norm")]
    ZeroNormSegment(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
