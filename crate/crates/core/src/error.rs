use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A mode was used after consumption, twice in one operation, or with the wrong signal type.
    #[error("usage error: {0}")]
    Usage(String),
    /// A form references a primitive the network does not own.
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("unsupported state: {0}")]
    UnsupportedState(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// An internal invariant (symplectic pairing, cascade identity) failed.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
