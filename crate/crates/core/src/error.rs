use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the region where the operation is defined, or a
    /// precondition of the underlying estimate does not hold.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Requested degree exceeds the configured maximum.
    #[error("degree {n} exceeds the configured maximum {max}")]
    Capacity { n: usize, max: usize },

    /// The integrand produced a non-finite value.
    #[error("integrand is not finite at x = {location}")]
    Integration { location: f64 },

    #[error("invalid data in {source_name}: {reason}")]
    Data { source_name: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}
