use thiserror::Error;

#[derive(Debug, Error)]
pub enum VolError {
    #[error("file does not start with the VVL1 magic")]
    BadMagic,
    #[error("file ends early while reading {context}")]
    TruncatedData { context: String },
    #[error("unsupported dtype code {0} (0 = float32, 1 = uint8)")]
    UnsupportedDtype(u8),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),
    #[error("illegal label value {value} at voxel index {index} (allowed: 0, 1, 2, 4)")]
    IllegalLabel { value: u8, index: usize },
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
}

pub type Result<T> = std::result::Result<T, VolError>;
