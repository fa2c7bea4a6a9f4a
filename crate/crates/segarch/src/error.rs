use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("no detection above the score floor")]
    NoDetection,
    #[error(transparent)]
    Tensor(#[from] autonet::TensorError),
    #[error(transparent)]
    Volume(#[from] volcore::VolError),
    #[error(transparent)]
    Window(#[from] ctxwin::CtxError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ArchError>;
