use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("utility out of range: {0}")]
    OutOfRange(String),

    #[error("geometry failure for assignment {sigma:?}: {reason}")]
    Geometry { sigma: Vec<usize>, reason: String },

    #[error("linear program {0}")]
    Lp(String),

    #[error("empty strategy menu: {0}")]
    EmptyMenu(String),

    #[error("engine contract violation: {0}")]
    ContractViolation(String),

    #[error("combinatorial cap exceeded: {what} would have {count} elements (cap {cap})")]
    CapExceeded { what: String, count: u128, cap: u128 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
