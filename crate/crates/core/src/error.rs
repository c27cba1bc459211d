use thiserror::Error;
use wpt_sdp::{SdpError, SolveStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `v†Ha = 0`: the source is unidentifiable from the filtered output.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A relaxation expected to be tight returned a non-rank-one solution.
    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("inner solve ended with status {0:?}")]
    Solver(SolveStatus),

    #[error(transparent)]
    Sdp(#[from] SdpError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CoreError {
    fn from(e: std::io::Error) -> Self {
        CoreError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
