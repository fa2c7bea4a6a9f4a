use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid convolution spec: {0}")]
    SpecInvalid(String),
    #[error("label {label} out of range for {classes} classes at position {position}")]
    LabelOutOfRange {
        label: usize,
        classes: usize,
        position: usize,
    },
    #[error("checkpoint: bad magic (expected \"CKP1\")")]
    BadMagic,
    #[error("checkpoint: file truncated ({context})")]
    Truncated { context: String },
    #[error("checkpoint: manifest entry malformed: {0}")]
    ManifestInvalid(String),
    #[error("checkpoint parameter {name}: {reason}")]
    ParamMismatch { name: String, reason: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TensorError>;
