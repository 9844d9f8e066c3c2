//! Complex linear algebra: sparse Hermitian matrices, Kronecker products,
//! full and extremal eigensolvers, matrix-exponential action and a fixed-step
//! RK4 integrator.
//!
//! Everything is built around two types: [`SparseComplexMatrix`], a CSR
//! matrix that carries every Hamiltonian in the crate, and [`StateVector`],
//! a dense amplitude vector.

mod eigen;
mod expm;
mod ode;
mod sparse;
mod vector;

pub use eigen::{eigh_dense, eigs_smallest, hermitian_eigen, EigenResult, EigsOptions};
pub use expm::{expm_action, expm_dense, DENSE_EXPM_MAX_DIM};
pub use ode::{ode_rk4, ode_rk4_endpoint};
pub use sparse::{kron, SparseComplexMatrix};
pub use vector::{kron_vectors, StateVector};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;

/// Shorthand for a real number as a complex scalar.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Shorthand for a purely imaginary scalar.
#[inline]
pub fn im(y: f64) -> C64 {
    C64::new(0.0, y)
}
