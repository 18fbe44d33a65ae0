use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tensor is off the variety: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    OffVariety { residual: f64, tol: f64 },
    #[error("recovery failed: {0}")]
    Recovery(String),
    #[error("loop lift failed: {0}")]
    Lift(String),
    #[error("solver diverged at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },
    #[error("winding computation failed: {0}")]
    Winding(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
