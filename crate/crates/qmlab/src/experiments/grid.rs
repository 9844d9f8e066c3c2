//! Grid experiments: `stepwell`, `dynamics-1d` and `gpe-ground {1d|3d}`.

use std::f64::consts::PI;

use qmlab_core::dynamics::{
    ground_imag, moments_3d, propagate_real_trajectory, thomas_fermi, Grid3D, ImagTimeOptions, InitialState,
    SplitStepPlan, TrapParams,
};
use qmlab_core::grid1d::{
    fit_power_law, kinetic_position, potential_position, potential_samples, stepwell_analytic, stepwell_ground,
    stepwell_overlap, Grid1D, StepWellMethod,
};
use qmlab_core::linalg::expm_action;
use qmlab_core::spin::constants::HBAR_SI;
use qmlab_core::{StateVector, C64};
use rayon::prelude::*;

use super::{new_table, Outcome};
use crate::config::{check, ExperimentConfig, Kind, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::parallel;

pub const STEPWELL: [ParamSpec; 2] = [
    ParamSpec::new("omega", Kind::Real, "2", "step height in units of the box ground-state energy"),
    ParamSpec::new("n_max", Kind::Range, "8:32:2", "basis sizes, min:max:step"),
];

pub fn stepwell(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let omega = cfg.real("omega")?;
    let ns = cfg.range("n_max")?.counts()?;
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::config(format!("n_max must be >= 2, got {n}")));
    }
    let sol = stepwell_analytic(omega)?;
    let pool = parallel::pool()?;
    let rows = pool.install(|| {
        ns.par_iter()
            .map(|&n| -> qmlab_core::Result<Vec<f64>> {
                let mut row = vec![n as f64];
                for method in [StepWellMethod::Momentum, StepWellMethod::Mixed] {
                    let (e, u) = stepwell_ground(omega, n, method)?;
                    row.push(e);
                    row.push(1.0 - stepwell_overlap(&sol, &u)?.norm_sqr());
                }
                Ok(row)
            })
            .collect::<qmlab_core::Result<Vec<_>>>()
    })?;
    let mut t = new_table(cfg, ["n_max", "e_momentum", "deficit_momentum", "e_mixed", "deficit_mixed"]);
    for r in rows {
        t.push(r)?;
    }
    t.result("k1", sol.k1);
    t.result("k2", sol.k2);
    t.result("energy_analytic", sol.energy());
    let mut summary = format!("stepwell: Omega={omega} k2={:.6} E={:.6}", sol.k2, sol.energy());
    if ns.len() >= 2 {
        let xs = t.column("n_max").unwrap_or_default();
        for (col, key) in [("deficit_momentum", "slope_momentum"), ("deficit_mixed", "slope_mixed")] {
            let ys = t.column(col).unwrap_or_default();
            let (_, p) = fit_power_law(&xs, &ys)?;
            t.result(key, p);
            summary.push_str(&format!(" {key}={p:.3}"));
        }
    }
    Ok(Outcome::single(t, summary))
}

pub const DYNAMICS: [ParamSpec; 8] = [
    ParamSpec::new("n", Kind::Count, "64", "grid points"),
    ParamSpec::new("strength", Kind::Real, "200", "harmonic potential W(x) = strength*(x-1/2)^2"),
    ParamSpec::new("g", Kind::Real, "0", "non-linear coupling g|psi|^2"),
    ParamSpec::new("x0", Kind::Real, "0.4", "initial packet center"),
    ParamSpec::new("sigma", Kind::Real, "0.08", "initial packet width"),
    ParamSpec::new("k0", Kind::Real, "10", "initial packet wavenumber"),
    ParamSpec::new("t", Kind::Real, "0.05", "total propagation time"),
    ParamSpec::new("steps", Kind::Count, "64", "Trotter steps M (>= 2)"),
];

/// Largest grid for which the dense-exponential oracle is evaluated.
const ORACLE_MAX_N: usize = 512;

pub fn dynamics(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let n = check::at_least("n", cfg.count("n")?, 2)?;
    let strength = cfg.real("strength")?;
    let g = cfg.real("g")?;
    let x0 = check::within("x0", cfg.real("x0")?, 0.0, 1.0)?;
    let sigma = check::positive("sigma", cfg.real("sigma")?)?;
    let k0 = cfg.real("k0")?;
    let total = check::positive("t", cfg.real("t")?)?;
    let steps = check::at_least("steps", cfg.count("steps")?, 2)?;

    let grid = Grid1D::new(n)?;
    let w = |x: f64| strength * (x - 0.5) * (x - 0.5);
    let plan = SplitStepPlan::new_1d(&grid, potential_samples(&grid, w)?, g)?;
    let xs = grid.points();
    let psi0 = StateVector::new(
        xs.iter()
            .map(|x| C64::from_polar((-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp(), k0 * x))
            .collect(),
    )
    .normalized()?;
    let traj = propagate_real_trajectory(&plan, &psi0, total, steps)?;

    let mut t = new_table(cfg, ["t", "norm", "x_mean", "x_var", "mu"]);
    for (time, psi) in &traj {
        let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let norm: f64 = p.iter().sum();
        let m1: f64 = xs.iter().zip(&p).map(|(x, q)| x * q).sum::<f64>() / norm;
        let m2: f64 = xs.iter().zip(&p).map(|(x, q)| x * x * q).sum::<f64>() / norm;
        t.push(vec![*time, norm.sqrt(), m1, m2 - m1 * m1, plan.chemical_potential(psi)])?;
    }
    let final_state = &traj[traj.len() - 1].1;
    let mut summary = format!("dynamics-1d: n={n} M={steps} t={total}, final norm {:.15}", final_state.norm());
    if g == 0.0 && n <= ORACLE_MAX_N {
        let h = kinetic_position(&grid).add(&potential_position(&grid, w)?)?;
        let exact = expm_action(&h, C64::new(0.0, -total), &psi0)?;
        let err = final_state.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        t.result("oracle_error", err);
        summary.push_str(&format!(", error vs exact exponential {err:.3e}"));
    }
    Ok(Outcome::single(t, summary))
}

pub const GPE_1D: [ParamSpec; 6] = [
    ParamSpec::new("n", Kind::Count, "64", "grid points"),
    ParamSpec::new("strength", Kind::Real, "200", "harmonic potential W(x) = strength*(x-1/2)^2"),
    ParamSpec::new("g", Kind::Real, "10", "non-linear coupling g|psi|^2"),
    ParamSpec::new("db", Kind::Real, "1e-4", "imaginary-time step"),
    ParamSpec::new("tol", Kind::Real, "1e-10", "fixed-point tolerance on successive states"),
    ParamSpec::new("max_iter", Kind::Count, "1000000", "iteration limit"),
];

pub fn gpe_1d(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let n = check::at_least("n", cfg.count("n")?, 2)?;
    let strength = cfg.real("strength")?;
    let db = check::positive("db", cfg.real("db")?)?;
    let grid = Grid1D::new(n)?;
    let plan = SplitStepPlan::new_1d(&grid, potential_samples(&grid, |x| strength * (x - 0.5) * (x - 0.5))?, cfg.real("g")?)?;
    let opts = ImagTimeOptions {
        tolerance: check::positive("tol", cfg.real("tol")?)?,
        max_iter: check::at_least("max_iter", cfg.count("max_iter")?, 1)?,
        initial: InitialState::Random { seed: cfg.seed },
        record_mu: false,
    };
    let gs = ground_imag(&plan, db, &opts)?;
    let mut t = new_table(cfg, ["x", "density"]);
    for (x, z) in grid.points().iter().zip(gs.gamma.iter()) {
        t.push(vec![*x, z.norm_sqr()])?;
    }
    t.result("mu", gs.mu);
    t.result("iterations", gs.iterations as f64);
    let summary = format!("gpe-ground 1d: mu = {:.8} after {} iterations", gs.mu, gs.iterations);
    Ok(Outcome::single(t, summary))
}

pub const GPE_3D: [ParamSpec; 7] = [
    ParamSpec::new("n_atoms", Kind::Real, "1000", "atom number N"),
    ParamSpec::new("n", Kind::Count, "41", "grid points per axis"),
    ParamSpec::new("box_um", Kind::Real, "10", "edge of the cubic box in micrometres"),
    ParamSpec::new("db", Kind::Real, "1e-3", "imaginary-time step"),
    ParamSpec::new("tol", Kind::Real, "1e-6", "fixed-point tolerance on successive states"),
    ParamSpec::new("max_iter", Kind::Count, "1000000", "iteration limit"),
    ParamSpec::new("sigma", Kind::Real, "0", "width of a Gaussian start in box units (0: random start)"),
];

pub fn gpe_3d(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let n = check::at_least("n", cfg.count("n")?, 2)?;
    let mut trap = TrapParams::rb87(check::positive("n_atoms", cfg.real("n_atoms")?)?);
    trap.box_length = check::positive("box_um", cfg.real("box_um")?)? * 1e-6;
    let db = check::positive("db", cfg.real("db")?)?;
    let sigma = check::non_negative("sigma", cfg.real("sigma")?)?;
    let grid = Grid3D::from_trap(n, &trap)?;
    let plan = SplitStepPlan::new_3d(&grid)?;
    let opts = ImagTimeOptions {
        tolerance: check::positive("tol", cfg.real("tol")?)?,
        max_iter: check::at_least("max_iter", cfg.count("max_iter")?, 1)?,
        initial: if sigma > 0.0 { InitialState::Gaussian { sigma } } else { InitialState::Random { seed: cfg.seed } },
        record_mu: false,
    };
    let gs = ground_imag(&plan, db, &opts)?;
    let mom = moments_3d(&gs.gamma, &grid)?;

    // Marginal densities along each axis (x slowest in the flat index).
    let mut marg = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (idx, z) in gs.gamma.iter().enumerate() {
        let p = z.norm_sqr();
        marg[0][idx / (n * n)] += p;
        marg[1][(idx / n) % n] += p;
        marg[2][idx % n] += p;
    }
    let mut t = new_table(cfg, ["u", "rho_x", "rho_y", "rho_z"]);
    for (j, u) in grid.coordinates().iter().enumerate() {
        t.push(vec![*u, marg[0][j], marg[1][j], marg[2][j]])?;
    }
    t.result("mu", gs.mu);
    t.result("iterations", gs.iterations as f64);
    for (a, axis) in ["x", "y", "z"].iter().enumerate() {
        t.result(&format!("width_{axis}"), mom.widths[a]);
        t.result(&format!("harmonic_width_{axis}"), grid.harmonic_widths()[a]);
    }
    let mut summary = format!(
        "gpe-ground 3d: mu = {:.6} after {} iterations, widths [{:.6}, {:.6}, {:.6}]",
        gs.mu, gs.iterations, mom.widths[0], mom.widths[1], mom.widths[2]
    );
    if trap.n_atoms >= 2.0 {
        let tf = thomas_fermi(&trap)?;
        let a2 = trap.box_length * trap.box_length;
        let e_box = PI * PI * HBAR_SI * HBAR_SI / (2.0 * trap.mass * a2);
        t.result("tf_mu", tf.mu / e_box);
        for (a, axis) in ["x", "y", "z"].iter().enumerate() {
            let ratio = mom.mean_sq[a] * a2 / tf.mean_sq[a];
            t.result(&format!("tf_radius_{axis}"), tf.radii[a] / trap.box_length);
            t.result(&format!("mean_sq_ratio_{axis}"), ratio);
        }
        summary.push_str(&format!(", Thomas-Fermi mu = {:.6}", tf.mu / e_box));
    }
    Ok(Outcome::single(t, summary))
}
