use thiserror::Error;

/// Failure categories shared by every computation in the crate.
///
/// The variants map one-to-one onto the CLI exit codes, so callers can
/// distinguish bad input from resource limits from numerical trouble.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its documented range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A special function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request needs more primes, tuples or memory than allowed.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A quadrature, root finder or consistency check failed.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// An invariant that should hold by construction was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Domain(_) => "domain",
            Error::Capacity(_) => "capacity",
            Error::Numeric(_) => "numeric",
            Error::Internal(_) => "internal",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
