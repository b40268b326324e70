use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("out of map: ({x}, {y})")]
    OutOfMap { x: f64, y: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("nonpositive distance: {0} m")]
    NonpositiveDistance(f64),

    #[error("nonpositive antenna height: {0} m")]
    NonpositiveHeight(f64),

    #[error("grid too coarse for d_c: spacing {spacing} m > d_c/5 = {limit} m")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("position ({x}, {y}) outside the shadowing grid extent")]
    OutsideGrid { x: f64, y: f64 },

    #[error("circulant embedding is not positive semidefinite (min eigenvalue ratio {0:e})")]
    EmbeddingIndefinite(f64),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("expected {expected} shadowing fields, got {got}")]
    FieldCount { expected: usize, got: usize },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("zero-variance feature {index}")]
    ZeroVariance { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged")]
    TrainingDiverged,

    #[error("attenuation {0} dB is below the free-space minimum")]
    AttenuationBelowFreeSpace(f64),

    #[error("ROC needs both classes present")]
    SingleClass,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::TrainingDiverged
                | Error::EmbeddingIndefinite(_)
                | Error::NotPositiveDefinite
                | Error::NonpositiveDistance(_)
                | Error::AttenuationBelowFreeSpace(_)
        )
    }
}
