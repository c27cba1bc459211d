use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Rank-one extraction was asked to factor a zero matrix.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("solver did not reach optimality: {0:?}")]
    NotOptimal(crate::SolveStatus),
}

pub type Result<T> = std::result::Result<T, SdpError>;
