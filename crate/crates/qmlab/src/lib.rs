//! Command-line front end for `qmlab-core`.
//!
//! Experiments are described by a flat `key = value` config (plus
//! `--set key=value` overrides and per-parameter flags), run through the
//! numerical kernels, and written as plot-ready CSV or JSON tables with a
//! metadata block recording parameters, seed, version and constants.
//!
//! ```text
//! qmlab magic-field --bracket 0.5 6 --out magic.json
//! qmlab ising-scan --n 10 --s 0.5 --b -3:3:0.015625 --m 2 --out ising.csv
//! qmlab pimc-ho --zeta 1 --slices 20 --sweeps 100000 --seed 7 --out ho.csv
//! ```

#![warn(missing_docs)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod parallel;
pub mod table;

pub use cli::run;
pub use config::{ExperimentConfig, Format, Range};
pub use error::{CliError, CliResult};
pub use table::{read_table, write_table, ResultTable};
