//! `ising-scan`: ground-state observables of a spin ring along a field sweep.

use qmlab_core::ising::{Coupling, IsingSolver, Observables, RingModel};
use qmlab_core::spin::SpinSpec;
use rayon::prelude::*;

use super::{new_table, Outcome};
use crate::config::{ExperimentConfig, Kind, ParamSpec};
use crate::error::CliResult;
use crate::parallel;

pub const SCHEMA: [ParamSpec; 5] = [
    ParamSpec::new("n", Kind::Count, "10", "number of sites"),
    ParamSpec::new("s", Kind::Real, "0.5", "spin length S (integer or half-integer)"),
    ParamSpec::new("b", Kind::Range, "-3:3:0.015625", "field sweep, min:max:step"),
    ParamSpec::new("m", Kind::Count, "2", "eigenpairs per field (more are used near b = 0)"),
    ParamSpec::new("coupling", Kind::Choice(&["ising", "xy", "heisenberg"]), "ising", "spin-spin coupling"),
];

/// Observables at every field of `fields` for copies of `base`, computed in
/// parallel with one solver per worker. Results are in input order.
pub fn scan(base: &RingModel, fields: &[f64], m: usize) -> CliResult<Vec<Observables>> {
    let pool = parallel::pool()?;
    let out = pool.install(|| {
        fields
            .par_iter()
            .map_init(IsingSolver::default, |solver, &b| solver.observables(&base.with_field(b)?, m))
            .collect::<qmlab_core::Result<Vec<_>>>()
    })?;
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let kind = match cfg.text("coupling")? {
        "xy" => Coupling::Xy,
        "heisenberg" => Coupling::Heisenberg,
        _ => Coupling::Ising,
    };
    let spin = SpinSpec::from_s(cfg.real("s")?)?;
    let base = RingModel::new(spin, cfg.count("n")?, kind, 0.0)?;
    let m = crate::config::check::at_least("m", cfg.count("m")?, 1)?;
    let fields = cfg.range("b")?.points();
    let obs = scan(&base, &fields, m)?;

    let n_corr = obs[0].correlations.len();
    let mut columns: Vec<String> = [
        "b",
        "e0",
        "e1",
        "gap",
        "overlap_minus_inf",
        "overlap_plus_inf",
        "overlap_cat_plus",
        "overlap_cat_minus",
        "overlap_cat_sum",
        "mx",
        "my",
        "mz",
        "entropy",
    ]
    .map(String::from)
    .to_vec();
    columns.extend((1..=n_corr).map(|d| format!("c_{d}")));
    let mut t = new_table(cfg, columns);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for o in &obs {
        let mut row = vec![
            o.b,
            o.e0,
            o.e1,
            o.gap,
            o.overlap_minus_inf,
            o.overlap_plus_inf,
            o.overlap_cat_plus,
            o.overlap_cat_minus,
            o.overlap_cat_sum,
            mean(&o.mx),
            mean(&o.my),
            mean(&o.mz),
            o.entropy,
        ];
        row.extend(&o.correlations);
        t.push(row)?;
    }
    let min_gap = obs.iter().map(|o| o.gap).fold(f64::INFINITY, f64::min);
    t.result("min_gap", min_gap);
    let summary = format!(
        "ising-scan: N={} S={} {} fields, smallest gap {:.3e}",
        base.n_sites,
        spin.s(),
        fields.len(),
        min_gap
    );
    Ok(Outcome::single(t, summary))
}
