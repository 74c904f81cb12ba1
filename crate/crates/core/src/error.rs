use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NkError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The requested size is outside what exact or exhaustive routines can handle.
    #[error("infeasible size: {0}")]
    Infeasible(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl NkError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        NkError::InvalidParams(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        NkError::Infeasible(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        NkError::Numeric(msg.into())
    }

    /// Process exit code used by the `nk` front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            NkError::InvalidParams(_) => 2,
            NkError::Infeasible(_) => 3,
            NkError::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, NkError>;
