use thiserror::Error;

pub type Result<T> = std::result::Result<T, HrcpError>;

#[derive(Debug, Error)]
pub enum HrcpError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("instance too large for brute force: n = {n} (limit {limit})")]
    SizeGuard { n: usize, limit: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HrcpError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        HrcpError::Parse { line, message: message.into() }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        HrcpError::InvalidParameter(message.into())
    }
}
