//! The experiments behind the subcommands.
//!
//! Each experiment is a schema of typed parameters plus a function from a
//! resolved [`ExperimentConfig`] to result tables. Experiments are pure
//! given (config, seed): re-running one reproduces its tables bitwise.

mod atomic;
mod coupled;
mod grid;
mod ising;
mod monte_carlo;

use qmlab_core::spin::constants;

use crate::config::{ExperimentConfig, Format, ParamSpec};
use crate::error::CliResult;
use crate::table::ResultTable;

pub use ising::scan as ising_scan;

/// A subcommand.
pub struct Experiment {
    /// Subcommand path, e.g. `["gpe-ground", "3d"]`.
    pub path: &'static [&'static str],
    /// One-line description.
    pub about: &'static str,
    /// Parameters.
    pub schema: &'static [ParamSpec],
    /// Computation.
    pub run: fn(&ExperimentConfig) -> CliResult<Outcome>,
}

impl Experiment {
    /// Name as it appears in metadata, e.g. `gpe-ground 3d`.
    pub fn name(&self) -> String {
        self.path.join(" ")
    }
}

/// One table produced by an experiment.
#[derive(Clone, Debug)]
pub struct Output {
    /// `None` for the primary table; otherwise the suffix appended to the
    /// primary file stem (`run.csv` → `run_<suffix>.<ext>`).
    pub suffix: Option<&'static str>,
    /// Forced format of a secondary table.
    pub format: Option<Format>,
    /// The table.
    pub table: ResultTable,
}

/// Everything an experiment returns.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// Primary table first.
    pub outputs: Vec<Output>,
    /// One-line human-readable summary.
    pub summary: String,
}

impl Outcome {
    /// Outcome with a single primary table.
    pub fn single(table: ResultTable, summary: String) -> Self {
        Self { outputs: vec![Output { suffix: None, format: None, table }], summary }
    }

    /// The primary table.
    pub fn primary(&self) -> &ResultTable {
        &self.outputs[0].table
    }
}

/// All subcommands.
pub fn all() -> &'static [Experiment] {
    &[
        Experiment {
            path: &["hyperfine-levels"],
            about: "Rb-87 ground-state hyperfine levels tracked along a Bz sweep",
            schema: &atomic::LEVELS,
            run: atomic::levels,
        },
        Experiment {
            path: &["magic-field"],
            about: "Field where a hyperfine transition is first-order field-insensitive",
            schema: &atomic::MAGIC,
            run: atomic::magic,
        },
        Experiment {
            path: &["ising-scan"],
            about: "Spin-ring ground-state observables along a field sweep",
            schema: &ising::SCHEMA,
            run: ising::run,
        },
        Experiment {
            path: &["stepwell"],
            about: "Square well with a bottom step: analytic vs numerical ground states",
            schema: &grid::STEPWELL,
            run: grid::stepwell,
        },
        Experiment {
            path: &["dynamics-1d"],
            about: "Split-step real-time propagation of a Gaussian packet in a harmonic well",
            schema: &grid::DYNAMICS,
            run: grid::dynamics,
        },
        Experiment {
            path: &["gpe-ground", "1d"],
            about: "1D Gross-Pitaevskii ground state by imaginary-time propagation",
            schema: &grid::GPE_1D,
            run: grid::gpe_1d,
        },
        Experiment {
            path: &["gpe-ground", "3d"],
            about: "3D Rb-87 condensate ground state and Thomas-Fermi comparison",
            schema: &grid::GPE_3D,
            run: grid::gpe_3d,
        },
        Experiment {
            path: &["twobody"],
            about: "Two particles in a 1D well: ground states along an interaction sweep",
            schema: &coupled::TWOBODY,
            run: coupled::twobody,
        },
        Experiment {
            path: &["spinspace"],
            about: "Spin-1/2 particle in a well with a field gradient: reduced density matrices",
            schema: &coupled::SPINSPACE,
            run: coupled::spinspace,
        },
        Experiment {
            path: &["pimc-ho"],
            about: "Path-integral Monte Carlo thermal density of the harmonic oscillator",
            schema: &monte_carlo::PIMC,
            run: monte_carlo::pimc,
        },
        Experiment {
            path: &["mc-demo"],
            about: "Monte Carlo integration and Metropolis-Hastings sampling demos",
            schema: &monte_carlo::DEMO,
            run: monte_carlo::demo,
        },
    ]
}

/// Looks an experiment up by its name (`ising-scan`, `gpe-ground 3d`).
pub fn find(name: &str) -> Option<&'static Experiment> {
    all().iter().find(|e| e.name() == name)
}

/// Bundled constants echoed into every table.
pub fn constants_table() -> std::collections::BTreeMap<String, f64> {
    [
        ("a_hfs_mhz", constants::A_HFS),
        ("g_s", constants::G_S),
        ("g_l", constants::G_L),
        ("g_i", constants::G_I),
        ("mu_b_mhz_per_g", constants::MU_B),
        ("g_e", constants::G_E),
        ("hbar_si", constants::HBAR_SI),
        ("atomic_mass_unit_kg", constants::ATOMIC_MASS_UNIT),
        ("bohr_radius_m", constants::BOHR_RADIUS),
        ("rb87_mass_u", constants::RB87_MASS_U),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Empty table with the run's metadata filled in.
pub(crate) fn new_table<S: Into<String>>(cfg: &ExperimentConfig, columns: impl IntoIterator<Item = S>) -> ResultTable {
    let mut t = ResultTable::new(columns);
    t.metadata.experiment = cfg.experiment.clone();
    t.metadata.parameters = cfg.describe();
    t.metadata.seed = cfg.seed;
    t.metadata.version = env!("CARGO_PKG_VERSION").to_string();
    t.metadata.constants = constants_table();
    t
}

/// Runs experiment `name` with its defaults overridden by `overrides`
/// (`key=value`); a convenience for library users and tests.
pub fn run_with(name: &str, overrides: &[&str]) -> CliResult<Outcome> {
    let e = find(name).ok_or_else(|| crate::error::CliError::config(format!("unknown experiment '{name}'")))?;
    let mut cfg = ExperimentConfig::defaults(&e.name(), e.schema)?;
    for o in overrides {
        cfg.apply_override(e.schema, o)?;
    }
    (e.run)(&cfg)
}
