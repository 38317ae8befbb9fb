use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The stored truncation cannot certify the requested accuracy.
    #[error("truncation error: certified tail bound {achieved:e} exceeds requested {requested:e}")]
    Truncation { achieved: f64, requested: f64 },
    /// A Fourier-side operation was requested on a measure without declared Fourier data.
    #[error("measure has no declared Fourier side")]
    MissingFourierSide,
    /// Malformed textual input (test function specs, JSON, CSV, form names).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
