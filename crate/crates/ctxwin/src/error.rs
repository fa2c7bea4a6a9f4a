use thiserror::Error;

#[derive(Debug, Error)]
pub enum CtxError {
    #[error("window {window:?} larger than image {image:?}")]
    WindowLargerThanImage {
        window: (usize, usize),
        image: (usize, usize),
    },
    #[error("invalid rect: {0}")]
    InvalidRect(String),
    #[error("invalid scale: {0}")]
    InvalidScale(String),
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CtxError>;
