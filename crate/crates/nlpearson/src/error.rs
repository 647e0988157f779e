//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor received parameters outside their documented domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A point lies outside the state space or the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index beyond the discrete spectrum was requested.
    #[error("spectrum bound: {0}")]
    SpectrumBound(String),
    /// Quadrature, inversion or series evaluation did not reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Sampled input is too coarse for the requested evaluation.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A datum cannot be expanded (not square integrable, Dirac data, ...).
    #[error("datum error: {0}")]
    Datum(String),
    /// The operation is not available for this input kind.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Invalid job configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// An object was used outside its contract (e.g. wrong provenance).
    #[error("misuse: {0}")]
    Misuse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Misuse(_) | Error::Unsupported(_) | Error::Io(_) => 2,
            Error::Numeric(_) | Error::Resolution(_) => 3,
            Error::Parameter(_) | Error::Domain(_) | Error::SpectrumBound(_) | Error::Datum(_) => 4,
        }
    }
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn numeric<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numeric(msg.into()))
}
