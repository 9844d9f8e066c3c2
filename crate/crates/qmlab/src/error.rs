//! Error type of the front end and its mapping to process exit codes.

use std::path::PathBuf;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for I/O and other unexpected failures.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for an invalid command line or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a numerical method that did not converge.
pub const EXIT_NUMERIC: i32 = 3;

/// Everything that can stop an experiment.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad command line, config file entry or out-of-domain parameter.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical kernel failed.
    #[error(transparent)]
    Numeric(#[from] qmlab_core::Error),
    /// Reading or writing a file failed.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Serializing or parsing a table failed.
    #[error("table format error: {0}")]
    Format(String),
}

impl CliError {
    /// Shorthand for [`CliError::Config`].
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Process exit code for this error.
    ///
    /// Domain errors raised by the kernels (invalid arguments, oversized
    /// Hilbert spaces) count as configuration errors: they are caught before
    /// any heavy computation starts. Convergence failures, failed searches
    /// and non-finite intermediate values are numerical failures.
    pub fn exit_code(&self) -> i32 {
        use qmlab_core::Error as E;
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numeric(E::InvalidArgument(_) | E::TooLarge { .. } | E::NoSolution(_)) => EXIT_CONFIG,
            Self::Numeric(E::NoConvergence { .. } | E::SearchFailed(_) | E::NonFinite(_)) => EXIT_NUMERIC,
            Self::Numeric(_) | Self::Io { .. } | Self::Format(_) => EXIT_FAILURE,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Format(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Format(e.to_string())
    }
}

/// Result alias of the front end.
pub type CliResult<T> = Result<T, CliError>;
