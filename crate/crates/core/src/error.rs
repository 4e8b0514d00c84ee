use thiserror::Error;

#[derive(Debug, Error)]
pub enum MtError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("limit does not stabilize: {0}")]
    NoLimit(String),
    #[error("integration error: {0}")]
    Integration(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("extraction error: {0}")]
    Extraction(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("optimizer error: {0}")]
    Optimizer(String),
    #[error("mapping error: {0}")]
    Mapping(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MtError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(MtError::Domain(msg.into()))
}
