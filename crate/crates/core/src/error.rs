use thiserror::Error;

/// Errors raised across the solver, the oracle and the crossbar simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("encoding width mismatch: {0}")]
    Encoding(String),
    #[error("profile is not on the lattice: {0}")]
    Lattice(String),
    #[error("crossbar capacity exceeded: {0}")]
    Capacity(String),
    #[error("game too large for exhaustive enumeration: {0}")]
    Size(String),
    #[error("objective backend failure: {0}")]
    Backend(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn dim_err(what: &str, expected: usize, found: usize) -> Error {
    Error::Dimension(format!("{what}: expected {expected}, found {found}"))
}
