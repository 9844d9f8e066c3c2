//! Numerical kernels for small-scale quantum simulation.
//!
//! The crate is `no_std` (it only needs `alloc`): everything here is a pure
//! function of its inputs, so it can be embedded anywhere. File formats, the
//! command-line front end and thread pools live in the companion `qmlab`
//! crate.
//!
//! Units follow two conventions. Atomic-physics modules ([`spin`],
//! [`hyperfine`]) measure energies in h·MHz, fields in gauss and times in µs,
//! so ħ = 1/(2π). Grid modules ([`grid1d`], [`dynamics`], [`coupled`]) use a
//! box of length 1 and the box ground-state energy π²ħ²/(2ma²) as the energy
//! unit.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

mod error;
mod fft;
mod math;

pub mod composite;
pub mod coupled;
pub mod dynamics;
pub mod grid1d;
pub mod hyperfine;
pub mod ising;
pub mod linalg;
pub mod pimc;
pub mod quad;
pub mod spin;

pub use error::{Error, Result};
pub use linalg::{EigenResult, SparseComplexMatrix, StateVector, C64};
