use thiserror::Error;

/// Errors raised by the matching model and the mechanisms built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("search space of {size} assignments exceeds the bound of {bound}")]
    SearchTooLarge { size: u128, bound: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn infeasible(msg: impl Into<String>) -> Error {
    Error::Infeasible(msg.into())
}
