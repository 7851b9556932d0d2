use alloc::string::String;

/// Errors raised by the reconstruction pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("vectors are rank deficient")]
    RankDeficient,
    /// No sample lies strictly inside the support radius of the query.
    #[error("query point has no sample within the support radius")]
    OutOfSupport,
    #[error("point lies on or too close to the medial axis")]
    MedialAxis,
    #[error("sample {index} has {found} neighbors, need at least {needed}")]
    InsufficientNeighbors {
        index: usize,
        found: usize,
        needed: usize,
    },
    #[error("not enough data: {0}")]
    InsufficientData(String),
    /// An iterate of the projection left the support of the field.
    #[error("iterate left the support of the field")]
    LeftSupport,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
