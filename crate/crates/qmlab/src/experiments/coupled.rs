//! `twobody` and `spinspace`.

use qmlab_core::coupled::{
    interparticle_stats, perturbative_gap, spinspace_ground, two_body_ground, Interaction, SpinSpaceModel, TwoBodyModel,
};
use qmlab_core::grid1d::Grid1D;
use qmlab_core::linalg::EigsOptions;
use rayon::prelude::*;

use super::{new_table, Outcome};
use crate::config::{check, ExperimentConfig, Kind, ParamSpec};
use crate::error::CliResult;
use crate::parallel;

pub const TWOBODY: [ParamSpec; 4] = [
    ParamSpec::new("n", Kind::Count, "10", "grid points per particle"),
    ParamSpec::new("omega", Kind::Real, "0", "strength of the trap Omega*(x-1/2)^2 (0: bare square well)"),
    ParamSpec::new("g", Kind::Range, "-2:5:0.5", "interaction strength sweep, min:max:step"),
    ParamSpec::new("interaction", Kind::Choice(&["contact", "coulomb"]), "contact", "interaction type"),
];

pub fn twobody(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let n = check::at_least("n", cfg.count("n")?, 2)?;
    let omega = cfg.real("omega")?;
    let coulomb = cfg.text("interaction")? == "coulomb";
    let strengths = cfg.range("g")?.points();
    let grid = Grid1D::new(n)?;
    let w: Vec<f64> = grid.points().iter().map(|x| (x - 0.5) * (x - 0.5)).collect();
    let pool = parallel::pool()?;
    let rows = pool.install(|| {
        strengths
            .par_iter()
            .map(|&g| -> qmlab_core::Result<Vec<f64>> {
                let inter = if coulomb { Interaction::coulomb(g, &grid) } else { Interaction::Contact { g } };
                let model = TwoBodyModel::new(grid.clone(), omega, w.clone(), inter)?;
                let gs = two_body_ground(&model, &EigsOptions::default())?;
                let (mean, var) = interparticle_stats(&gs.psi, &grid)?;
                Ok(vec![g, gs.energy, gs.diagonal_density(), gs.exchange_parity, mean, var])
            })
            .collect::<qmlab_core::Result<Vec<_>>>()
    })?;
    let mut t = new_table(cfg, ["g", "energy", "diagonal_density", "exchange_parity", "separation_mean", "separation_var"]);
    for r in rows {
        t.push(r)?;
    }
    let summary = format!("twobody: n={n} Omega={omega}, {} interaction strengths", strengths.len());
    Ok(Outcome::single(t, summary))
}

pub const SPINSPACE: [ParamSpec; 4] = [
    ParamSpec::new("n", Kind::Count, "20", "grid points"),
    ParamSpec::new("omega", Kind::Real, "100", "harmonic trap strength"),
    ParamSpec::new("f", Kind::Real, "1e4", "field gradient coupling"),
    ParamSpec::new("bx", Kind::Real, "1e3", "transverse field"),
];

pub fn spinspace(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let n = check::at_least("n", cfg.count("n")?, 2)?;
    let (omega, f, bx) = (cfg.real("omega")?, cfg.real("f")?, cfg.real("bx")?);
    let model = SpinSpaceModel::new(n, omega, f, bx)?;
    let gs = spinspace_ground(&model, &EigsOptions::default())?;
    let mut t = new_table(cfg, ["x", "spin_profile", "density"]);
    for (j, x) in model.coordinates().iter().enumerate() {
        t.push(vec![*x, gs.spin_profile[j], gs.rho_space.get(j, j).re])?;
    }
    let r = &gs.rho_spin;
    t.result("energy", gs.energy);
    t.result("excited_energy", gs.excited_energy);
    t.result("gap", gs.gap());
    t.result("perturbative_gap", perturbative_gap(omega, f, bx));
    t.result("rho_spin_uu", r.get(0, 0).re);
    t.result("rho_spin_ud_re", r.get(0, 1).re);
    t.result("rho_spin_ud_im", r.get(0, 1).im);
    t.result("rho_spin_dd", r.get(1, 1).re);
    t.result("spin_purity", r.purity());
    let summary = format!(
        "spinspace: E0 = {:.6}, gap = {:.6}, spin coherence rho_ud = {:.6}",
        gs.energy,
        gs.gap(),
        r.get(0, 1).re
    );
    Ok(Outcome::single(t, summary))
}
