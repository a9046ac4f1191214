//! Error type shared by the whole crate.

/// Errors reported by dataset construction and the fitting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Total scatter is numerically zero (all samples identical).
    #[error("degenerate dataset: total scatter is zero")]
    DegenerateDataset,

    /// The projected between-scatter operator does not have the
    /// expected 0/1 eigenvalue structure; rank assumptions are broken.
    #[error("scatter structure violated: {0}")]
    ScatterStructure(String),

    #[error("rank assumption violated: {0}")]
    RankAssumption(String),

    #[error("Y not full column rank")]
    RankDeficientSketch,

    #[error("rank-deficient input: {0}")]
    RankDeficientInput(String),

    #[error("no full-rank sketch found after {0} retries")]
    RetriesExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
