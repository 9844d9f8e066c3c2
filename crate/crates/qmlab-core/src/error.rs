use alloc::string::String;

/// Errors reported by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Operand dimensions do not fit together.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Dimension required by the operation.
        expected: usize,
        /// Dimension actually supplied.
        found: usize,
    },
    /// A matrix that must be Hermitian is not.
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian {
        /// Largest |A_ij − conj(A_ji)|.
        deviation: f64,
    },
    /// An iterative method ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        /// Iterations (or matrix-vector products) spent.
        iterations: usize,
        /// Best residual reached.
        residual: f64,
    },
    /// A NaN or infinity appeared.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    /// The requested Hilbert space exceeds the size guard.
    #[error("Hilbert space dimension {dim} exceeds the limit {limit}")]
    TooLarge {
        /// Requested dimension.
        dim: usize,
        /// Largest allowed dimension.
        limit: usize,
    },
    /// A closed-form problem has no solution for the given parameters.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// A bracketed search could not locate its target.
    #[error("search failed: {0}")]
    SearchFailed(String),
}

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
