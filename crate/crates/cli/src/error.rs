use std::path::PathBuf;

use thiserror::Error;

/// Failure of a run, mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("audit violation: {0}")]
    Audit(String),
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] hermite_approx::Error),
}

impl CliError {
    pub const CONFIG: u8 = 2;
    pub const PRECONDITION: u8 = 3;
    pub const AUDIT: u8 = 4;
    pub const IO: u8 = 5;

    pub fn exit_code(&self) -> u8 {
        use hermite_approx::Error as E;
        match self {
            CliError::Config(_) => Self::CONFIG,
            CliError::Audit(_) => Self::AUDIT,
            CliError::Io { .. } => Self::IO,
            CliError::Library(e) => match e {
                E::Domain { .. } | E::Capacity { .. } => Self::PRECONDITION,
                E::Io { .. } => Self::IO,
                E::Data { .. } | E::Csv(_) => Self::CONFIG,
                _ => 1,
            },
        }
    }
}
