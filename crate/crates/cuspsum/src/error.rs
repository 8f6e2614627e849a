use std::path::PathBuf;

use crate::cache::CacheError;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const PARTIAL_SWEEP: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{0}")]
    Data(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{failed} of {total} sweep rows failed")]
    PartialSweep { failed: usize, total: usize },
    #[error("{failed} verification check(s) failed")]
    VerifyFailed { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Cache(_) | CliError::Data(_) | CliError::Write { .. } | CliError::VerifyFailed { .. } => exit::DATA,
            CliError::PartialSweep { .. } => exit::PARTIAL_SWEEP,
            CliError::Resource(_) => exit::RESOURCE,
        }
    }

    /// Maps a core error raised while evaluating a valid configuration.
    pub fn from_core(e: cuspsum_core::Error) -> Self {
        use cuspsum_core::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Usage(m),
            E::OutOfRange { .. } | E::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            E::Overflow { .. } => CliError::Data(e.to_string()),
        }
    }
}
