//! `pimc-ho` and `mc-demo`.

use qmlab_core::pimc::{
    batch_fit, density_from_rings, ho_bin_probability, ho_density, ho_second_moment, ks_distance, mc_integrate,
    mc_integrate_weighted, metropolis_matrix, mh_chain, sample_closed_paths, stationary_distribution, Binning,
    ClosedPathParams, PathEnsemble, Rng,
};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{new_table, Outcome, Output};
use crate::config::{check, ExperimentConfig, Format, Kind, ParamSpec};
use crate::error::{CliError, CliResult};
use crate::parallel;

pub const PIMC: [ParamSpec; 12] = [
    ParamSpec::new("zeta", Kind::Real, "1", "inverse temperature zeta = beta*hbar*omega (> 0)"),
    ParamSpec::new("slices", Kind::Count, "20", "beads per ring M (>= 2)"),
    ParamSpec::new("sweeps", Kind::Count, "100000", "sweeps per chain (one sweep = M proposals)"),
    ParamSpec::new("chains", Kind::Count, "1", "independent chains, each on its own RNG stream"),
    ParamSpec::new("bead_step", Kind::Real, "0", "single-bead step d1 (0: 2.8*sqrt(zeta/2M))"),
    ParamSpec::new("shift_step", Kind::Real, "0", "ring-shift step d2 (0: 3/sqrt(zeta))"),
    ParamSpec::new("bead_fraction", Kind::Real, "0.5", "probability of a single-bead move"),
    ParamSpec::new("burn_in", Kind::Int, "-1", "discarded sweeps per chain (-1: 10%)"),
    ParamSpec::new("bins", Kind::Count, "0", "histogram bins (0: Freedman-Diaconis)"),
    ParamSpec::new("fit_bins", Kind::Count, "12", "bins over +-3 sigma for the goodness-of-fit test"),
    ParamSpec::new("fit_batches", Kind::Count, "50", "batches for the goodness-of-fit test"),
    ParamSpec::new("samples", Kind::Count, "0", "1: also write every recorded bead (sweep, bead, value)"),
];

/// Validated sampler settings of a `pimc-ho` config.
pub fn pimc_params(cfg: &ExperimentConfig) -> CliResult<ClosedPathParams> {
    let zeta = check::positive("zeta", cfg.real("zeta")?)?;
    let slices = check::at_least("slices", cfg.count("slices")?, 2)?;
    let sweeps = check::at_least("sweeps", cfg.count("sweeps")?, 2)?;
    let mut p = ClosedPathParams::harmonic_defaults(zeta, slices, sweeps);
    let d1 = check::non_negative("bead_step", cfg.real("bead_step")?)?;
    let d2 = check::non_negative("shift_step", cfg.real("shift_step")?)?;
    if d1 > 0.0 {
        p.bead_step = d1;
    }
    if d2 > 0.0 {
        p.shift_step = d2;
    }
    p.bead_fraction = check::within("bead_fraction", cfg.real("bead_fraction")?, 0.0, 1.0)?;
    p.burn_in = match cfg.int("burn_in")? {
        -1 => None,
        b if b >= 0 && (b as usize) < sweeps => Some(b as usize),
        b => return Err(CliError::config(format!("burn_in must be -1 or in [0, sweeps), got {b}"))),
    };
    Ok(p)
}

/// Runs `chains` independent chains in parallel; chain c uses RNG stream c
/// of `seed`, so the result does not depend on the thread count.
pub fn run_chains(params: &ClosedPathParams, chains: usize, seed: u64) -> CliResult<Vec<PathEnsemble>> {
    let pool = parallel::pool()?;
    let parts = pool.install(|| {
        (0..chains)
            .into_par_iter()
            .map(|c| sample_closed_paths(params, &mut Rng::stream(seed, c as u64)))
            .collect::<qmlab_core::Result<Vec<_>>>()
    })?;
    Ok(parts)
}

pub fn pimc(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let params = pimc_params(cfg)?;
    let zeta = params.zeta;
    let chains = check::at_least("chains", cfg.count("chains")?, 1)?;
    let parts = run_chains(&params, chains, cfg.seed)?;
    let ens = PathEnsemble::concat(&parts)?;

    let binning = match cfg.count("bins")? {
        0 => Binning::FreedmanDiaconis,
        b => Binning::Count(b),
    };
    let hist = density_from_rings(&ens, binning, false)?;
    let mut density = new_table(cfg, ["bin_center", "density", "analytic_density"]);
    for (c, d) in hist.centers().iter().zip(hist.density()) {
        density.push(vec![*c, d, ho_density(zeta, *c)?])?;
    }

    let mut stats = new_table(
        cfg,
        ["chain", "bead_accepted", "bead_rejected", "shift_accepted", "shift_rejected", "bead_acceptance", "shift_acceptance"],
    );
    for (c, p) in parts.iter().enumerate() {
        let s = p.stats;
        stats.push(vec![
            c as f64,
            s.single.accepted as f64,
            s.single.rejected as f64,
            s.shift.accepted as f64,
            s.shift.rejected as f64,
            s.single.acceptance(),
            s.shift.acceptance(),
        ])?;
    }
    let beads = ens.all_beads();
    let moment = beads.iter().map(|x| x * x).sum::<f64>() / beads.len() as f64;
    let exact = ho_second_moment(zeta)?;
    let mut results = vec![
        ("recorded_paths", ens.len() as f64),
        ("bead_step", params.bead_step),
        ("shift_step", params.shift_step),
        ("bead_acceptance", ens.stats.single.acceptance()),
        ("shift_acceptance", ens.stats.shift.acceptance()),
        ("second_moment", moment),
        ("exact_second_moment", exact),
    ];
    let fit_bins = check::at_least("fit_bins", cfg.count("fit_bins")?, 2)?;
    let batches = cfg.count("fit_batches")?;
    let mut summary = format!(
        "pimc-ho: zeta={zeta} M={} {} rings, <x^2> = {moment:.5} (exact {exact:.5})",
        params.slices,
        ens.len()
    );
    // The fit needs more batches than free bin fractions and enough rings
    // per batch; it is skipped (and absent from the results) otherwise.
    if batches > fit_bins && ens.len() >= 10 * batches {
        let sd = exact.sqrt();
        let edges: Vec<f64> = (0..=fit_bins).map(|i| -3.0 * sd + 6.0 * sd * i as f64 / fit_bins as f64).collect();
        let expected =
            edges.windows(2).map(|w| ho_bin_probability(zeta, w[0], w[1])).collect::<qmlab_core::Result<Vec<_>>>()?;
        let fit = batch_fit(&ens, &edges, &expected, batches)?;
        let dist = FisherSnedecor::new(fit.dof as f64, (fit.batches - fit.dof) as f64)
            .map_err(|e| CliError::Format(e.to_string()))?;
        let p = 1.0 - dist.cdf(fit.f_statistic());
        results.extend([("fit_t_squared", fit.t_squared), ("fit_dof", fit.dof as f64), ("fit_p_value", p)]);
        summary.push_str(&format!(", batch-fit p = {p:.3}"));
    }
    for (k, v) in results {
        density.result(k, v);
        stats.result(k, v);
    }

    let mut outputs = vec![
        Output { suffix: None, format: None, table: density },
        Output { suffix: Some("stats"), format: Some(Format::Json), table: stats },
    ];
    match cfg.count("samples")? {
        0 => {}
        1 => {
            let mut samples = new_table(cfg, ["sweep", "bead", "value"]);
            for (i, path) in ens.paths().enumerate() {
                for (j, x) in path.iter().enumerate() {
                    samples.push(vec![i as f64, j as f64, *x])?;
                }
            }
            outputs.push(Output { suffix: Some("samples"), format: Some(Format::Csv), table: samples });
        }
        s => return Err(CliError::config(format!("samples must be 0 or 1, got {s}"))),
    }
    Ok(Outcome { outputs, summary })
}

pub const DEMO: [ParamSpec; 4] = [
    ParamSpec::new("samples", Kind::Count, "10000", "points per Monte Carlo integral (>= 2)"),
    ParamSpec::new("step", Kind::Real, "0.015", "Metropolis step size d"),
    ParamSpec::new("chain", Kind::Count, "11000", "Metropolis chain length"),
    ParamSpec::new("burn_in", Kind::Count, "1000", "chain entries dropped before the KS test"),
];

fn f(x: f64) -> f64 {
    x * (1.0 - x)
}

fn p100(x: f64) -> f64 {
    101.0 * x.powi(100)
}

pub fn demo(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let m = check::at_least("samples", cfg.count("samples")?, 2)?;
    let d = check::positive("step", cfg.real("step")?)?;
    let len = check::at_least("chain", cfg.count("chain")?, 2)?;
    let burn = cfg.count("burn_in")?;
    if burn + 1 >= len {
        return Err(CliError::config("burn_in must leave at least two chain entries"));
    }
    let mut rng = Rng::seed(cfg.seed);
    let j1 = 1.0 / 6.0;
    let j2 = 101.0 / 10506.0;
    let uniform = mc_integrate(f, m, &mut rng)?;
    let plain = mc_integrate(|x| f(x) * p100(x), m, &mut rng)?;
    let weighted = mc_integrate_weighted(f, |z| z.powf(1.0 / 101.0), m, &mut rng)?;

    let mut t = new_table(cfg, ["case", "exact", "mean", "stderr", "z_score"]);
    for (case, exact, e) in [(1.0, j1, uniform), (2.0, j2, plain), (3.0, j2, weighted)] {
        let z = if e.stderr > 0.0 { (e.mean - exact) / e.stderr } else { 0.0 };
        t.push(vec![case, exact, e.mean, e.stderr, z])?;
    }
    let (chain, stats) = mh_chain(p100, 1.0, d, len, &mut rng)?;
    let ks = ks_distance(&chain[burn..], |x| x.powi(101))?;

    // Detailed balance on a discretized target: the stationary vector of the
    // Metropolis matrix must equal the normalized weights.
    let xs: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let w: Vec<f64> = xs.iter().map(|&x| p100(x).max(1e-300)).collect();
    let norm: f64 = w.iter().sum();
    let pi = stationary_distribution(&metropolis_matrix(&w, 2)?)?;
    let stationary_error = pi.iter().zip(&w).map(|(p, wi)| (p - wi / norm).abs()).fold(0.0, f64::max);

    let ratio = plain.stderr / weighted.stderr;
    t.result("stderr_ratio", ratio);
    t.result("mh_acceptance", stats.single.acceptance());
    t.result("mh_ks_distance", ks);
    t.result("stationary_error", stationary_error);
    let summary = format!(
        "mc-demo: J1 = {:.6} +- {:.1e}, J2 = {:.6} +- {:.1e} (weighted), stderr ratio {ratio:.1}, MH acceptance {:.3}",
        uniform.mean,
        uniform.stderr,
        weighted.mean,
        weighted.stderr,
        stats.single.acceptance()
    );
    Ok(Outcome::single(t, summary))
}
