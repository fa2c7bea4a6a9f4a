use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("volume dims mismatch: {0}")]
    DimsMismatch(String),
    #[error("spacing mismatch between surfaces: {0:?} vs {1:?}")]
    SpacingMismatch([f32; 3], [f32; 3]),
    #[error("empty surface: {context}")]
    EmptySurface { context: String },
    #[error("percentile {0} outside (0, 100]")]
    BadPercentile(f64),
    #[error(transparent)]
    Volume(#[from] volcore::VolError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed report: {0}")]
    BadReport(String),
}

pub type Result<T> = std::result::Result<T, MetricError>;
