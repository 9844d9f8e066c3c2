use qmlab_core::pimc::*;
use qmlab_core::quad::{integrate_panels, GaussLegendre};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

fn f(x: f64) -> f64 {
    x * (1.0 - x)
}

fn p100(x: f64) -> f64 {
    101.0 * x.powi(100)
}

#[test]
fn uniform_monte_carlo_integral() {
    let mut rng = Rng::seed(1);
    let est = mc_integrate(f, 10_000, &mut rng).unwrap();
    assert!((est.mean - 1.0 / 6.0).abs() < 4.0 * est.stderr, "{est:?}");
    // Same order of magnitude as the reference output 0.000748734.
    assert!((est.stderr - 7.5e-4).abs() < 1e-4);

    let c = mc_integrate(|_| 2.5, 100, &mut rng).unwrap();
    assert_eq!(c.mean, 2.5);
    assert_eq!(c.stderr, 0.0);
    assert!(mc_integrate(f, 1, &mut rng).is_err());
}

#[test]
fn weighted_sampling_beats_plain_sampling() {
    let target = 101.0 / 10506.0;
    let mut rng = Rng::seed(2);
    let plain = mc_integrate(|x| f(x) * p100(x), 10_000, &mut rng).unwrap();
    let weighted = mc_integrate_weighted(f, |z| z.powf(1.0 / 101.0), 10_000, &mut rng).unwrap();
    assert!((plain.mean - target).abs() < 4.0 * plain.stderr, "{plain:?}");
    assert!((weighted.mean - target).abs() < 4.0 * weighted.stderr, "{weighted:?}");
    assert!(plain.stderr / weighted.stderr > 3.0);

    let flat = mc_integrate_weighted(|_| 1.0, |z| z, 1000, &mut rng).unwrap();
    assert_eq!(flat.stderr, 0.0);

    let draws: Vec<f64> = (0..10_000).map(|_| rng.uniform().powf(1.0 / 101.0)).collect();
    let ks = ks_distance(&draws, |x| x.powi(101)).unwrap();
    assert!(ks < 0.02, "KS distance {ks}");
}

#[test]
fn standard_error_scales_as_inverse_root() {
    let mut ratio = 0.0;
    let trials = 20;
    for seed in 0..trials {
        let mut rng = Rng::seed(100 + seed);
        let a = mc_integrate(f, 5_000, &mut rng).unwrap();
        let b = mc_integrate(f, 10_000, &mut rng).unwrap();
        ratio += a.stderr / b.stderr;
    }
    ratio /= trials as f64;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn metropolis_chain_acceptance_and_distribution() {
    let mut rng = Rng::seed(3);
    let (chain, stats) = mh_chain(p100, 1.0, 0.015, 11_000, &mut rng).unwrap();
    assert_eq!(chain.len(), 11_000);
    assert_eq!(stats.single.proposals(), 10_999);
    let acc = stats.single.acceptance();
    assert!((0.40..=0.62).contains(&acc), "acceptance {acc}");
    let ks = ks_distance(&chain[1000..], |x| x.powi(101)).unwrap();
    assert!(ks < 0.03, "KS distance {ks}");
    assert!(chain.iter().all(|x| (0.0..=1.0).contains(x)));
}

#[test]
fn flat_density_accepts_every_proposal_inside_the_domain() {
    let d = 0.1;
    let (chain, stats) = mh_chain(|_| 1.0, 0.5, d, 5000, &mut Rng::seed(4)).unwrap();
    // A rejection can only come from a proposal off [0, 1], which needs the
    // current point within d of an edge.
    for w in chain.windows(2) {
        if w[0] == w[1] {
            assert!(w[0] < d || w[0] > 1.0 - d, "rejected at {}", w[0]);
        }
    }
    assert!(stats.single.acceptance() > 0.8);
    assert!(mh_chain(|_| 1.0, 0.5, 0.0, 10, &mut Rng::seed(4)).is_err());
}

#[test]
fn discretized_metropolis_has_the_target_as_stationary_state() {
    let xs = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let w: Vec<f64> = xs.iter().map(|x: &f64| (-1.7 * x * x + 0.3 * x).exp()).collect();
    let norm: f64 = w.iter().sum();
    for jump in [1, 2, 4] {
        let t = metropolis_matrix(&w, jump).unwrap();
        let pi = stationary_distribution(&t).unwrap();
        for (p, wi) in pi.iter().zip(&w) {
            assert!((p - wi / norm).abs() < 1e-10);
        }
        // Detailed balance holds pairwise, not just globally.
        for i in 0..5 {
            for j in 0..5 {
                assert!((w[i] * t[(i, j)] - w[j] * t[(j, i)]).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn three_state_path_toy_model() {
    // Open path 0 → 1 with M = 2: only the middle bead moves, restricted to
    // three grid positions with nearest-neighbour proposals.
    let zeta = 0.8;
    let grid = [0.0, 0.5, 1.0];
    let action = |x: f64| Path::from_beads(vec![0.0, x, 1.0], PathKind::Open, zeta).unwrap().action();
    let s: Vec<f64> = grid.iter().map(|&x| action(x)).collect();
    let mut t = nalgebra::DMatrix::<f64>::zeros(3, 3);
    for i in 0..3usize {
        for j in [i.wrapping_sub(1), i + 1] {
            if j < 3 {
                t[(i, j)] = 0.5 * acceptance_probability(s[j] - s[i]);
            }
        }
        t[(i, i)] = 1.0 - t.row(i).sum();
    }
    let pi = stationary_distribution(&t).unwrap();
    let z: f64 = s.iter().map(|v| (-v).exp()).sum();
    for (p, v) in pi.iter().zip(&s) {
        assert!((p - (-v).exp() / z).abs() < 1e-3);
    }
}

#[test]
fn open_paths_concentrate_on_the_straight_line_at_high_temperature() {
    let params = OpenPathParams { x0: 0.0, x_end: 1.0, slices: 20, zeta: 0.01, step: 0.05, sweeps: 10_000, burn_in: None };
    let ens = sample_open_paths(&params, &mut Rng::seed(5)).unwrap();
    assert_eq!(ens.len(), 9_000);
    assert!(ens.paths().all(|p| p[0] == 0.0 && p[20] == 1.0));
    let mid: Vec<f64> = ens.paths().map(|p| p[10]).collect();
    let mean = mid.iter().sum::<f64>() / mid.len() as f64;
    assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
    let inside = mid.iter().filter(|x| (*x - 0.5).abs() < 0.2).count();
    assert!(inside as f64 > 0.99 * mid.len() as f64);
}

#[test]
fn vanishing_steps_freeze_the_chain() {
    let params = OpenPathParams { x0: 0.0, x_end: 1.0, slices: 10, zeta: 1.0, step: 1e-9, sweeps: 1000, burn_in: Some(0) };
    let ens = sample_open_paths(&params, &mut Rng::seed(6)).unwrap();
    assert!(ens.stats.single.acceptance() > 0.999);
    let straight = Path::straight(0.0, 1.0, 10, 1.0).unwrap();
    let max_dev = ens
        .paths()
        .flat_map(|p| p.iter().zip(straight.beads()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    assert!(max_dev < 1e-6, "displacement {max_dev}");
}

#[test]
fn identical_seeds_reproduce_ensembles() {
    let closed = ClosedPathParams::harmonic_defaults(1.0, 12, 500);
    let a = sample_closed_paths(&closed, &mut Rng::seed(9)).unwrap();
    let b = sample_closed_paths(&closed, &mut Rng::seed(9)).unwrap();
    assert_eq!(a, b);
    let c = sample_closed_paths(&closed, &mut Rng::seed(10)).unwrap();
    assert_ne!(a.all_beads(), c.all_beads());
    let open = OpenPathParams { x0: 0.0, x_end: 1.0, slices: 8, zeta: 1.0, step: 0.3, sweeps: 200, burn_in: None };
    assert_eq!(sample_open_paths(&open, &mut Rng::seed(1)).unwrap(), sample_open_paths(&open, &mut Rng::seed(1)).unwrap());
}

#[test]
fn default_steps_give_moderate_acceptance() {
    for zeta in [0.1, 1.0, 10.0] {
        let params = ClosedPathParams::harmonic_defaults(zeta, 20, 2000);
        let ens = sample_closed_paths(&params, &mut Rng::seed(11)).unwrap();
        let a1 = ens.stats.single.acceptance();
        assert!((0.3..=0.7).contains(&a1), "zeta {zeta}: bead acceptance {a1}");
        assert_eq!(ens.stats.total().proposals(), 2000 * 20);
    }
}

#[test]
fn ring_shifts_are_needed_for_the_center_of_mass() {
    let zeta = 0.1;
    let target = ho_second_moment(zeta).unwrap();
    let run = |bead_fraction: f64| {
        let params = ClosedPathParams { bead_fraction, ..ClosedPathParams::harmonic_defaults(zeta, 20, 10_000) };
        let ens = sample_closed_paths(&params, &mut Rng::seed(12)).unwrap();
        let means = ens.path_means();
        let mu = means.iter().sum::<f64>() / means.len() as f64;
        means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / means.len() as f64
    };
    let beads_only = run(1.0);
    let mixed = run(0.5);
    assert!(beads_only < 0.2 * target, "bead-only variance {beads_only}");
    assert!(mixed > 0.7 * target, "mixed variance {mixed}");
}

#[test]
fn ring_density_matches_the_thermal_density() {
    // The reference settings: ζ = 1, M = 20, d₁ = 0.45, d₂ = 3, f = 0.5.
    let params = ClosedPathParams {
        x_start: 0.0,
        slices: 20,
        zeta: 1.0,
        bead_step: 0.45,
        shift_step: 3.0,
        bead_fraction: 0.5,
        sweeps: 100_000,
        burn_in: None,
    };
    let ens = sample_closed_paths(&params, &mut Rng::seed(13)).unwrap();
    let sd = ho_second_moment(1.0).unwrap().sqrt();
    let bins = 12;
    let edges: Vec<f64> = (0..=bins).map(|i| -3.0 * sd + 6.0 * sd * i as f64 / bins as f64).collect();
    let expected: Vec<f64> = edges.windows(2).map(|w| ho_bin_probability(1.0, w[0], w[1]).unwrap()).collect();
    let fit = batch_fit(&ens, &edges, &expected, 50).unwrap();
    let dist = FisherSnedecor::new(fit.dof as f64, (fit.batches - fit.dof) as f64).unwrap();
    let p = 1.0 - dist.cdf(fit.f_statistic());
    assert!(p > 0.01, "p = {p}, {fit:?}");

    let hist = density_from_rings(&ens, Binning::FreedmanDiaconis, false).unwrap();
    let integral: f64 = hist.density().iter().map(|d| d * hist.width()).sum();
    assert!((integral - 1.0).abs() < 1e-12);
}

#[test]
fn low_temperature_second_moment() {
    let zeta = 10.0;
    let ens = sample_closed_paths(&ClosedPathParams::harmonic_defaults(zeta, 20, 40_000), &mut Rng::seed(14)).unwrap();
    let hist = density_from_rings(&ens, Binning::Count(60), false).unwrap();
    let moment: f64 = hist.centers().iter().zip(hist.density()).map(|(x, d)| x * x * d * hist.width()).sum();
    // Oracle: quadrature of x²ρ(x) with the closed-form density.
    let exact = integrate_panels(|x| x * x * ho_density(zeta, x).unwrap(), &[-8.0, -2.0, 0.0, 2.0, 8.0], 40).unwrap();
    assert!((moment / exact - 1.0).abs() < 0.05, "{moment} vs {exact}");
}

#[test]
fn centered_rings_shrink_with_temperature() {
    let mut prev = f64::INFINITY;
    for zeta in [10.0, 1.0, 0.1] {
        let ens = sample_closed_paths(&ClosedPathParams::harmonic_defaults(zeta, 20, 5_000), &mut Rng::seed(15)).unwrap();
        let hist = density_from_rings(&ens, Binning::FreedmanDiaconis, true).unwrap();
        let var: f64 = hist.centers().iter().zip(hist.density()).map(|(x, d)| x * x * d * hist.width()).sum();
        assert!(var < prev, "zeta {zeta}: {var} !< {prev}");
        prev = var;
    }
    let empty = PathEnsemble::concat(&[]);
    assert!(empty.is_err());
}

#[test]
fn exact_density_matrix_properties() {
    let rule = GaussLegendre::new(60).unwrap();
    for zeta in [0.2, 1.0, 5.0] {
        let total: f64 = [-30.0, -10.0, -3.0, 0.0, 3.0, 10.0]
            .windows(2)
            .map(|w| rule.integrate(|x| ho_exact(zeta, x, x).unwrap(), w[0], w[1]))
            .sum::<f64>()
            + rule.integrate(|x| ho_exact(zeta, x, x).unwrap(), 10.0, 30.0);
        assert!((total - 1.0).abs() < 1e-8, "zeta {zeta}: {total}");
        let coth = 1.0 / (zeta / 2.0).tanh();
        assert!((ho_exact(zeta, 0.0, 0.0).unwrap() - 1.0 / (std::f64::consts::PI * coth).sqrt()).abs() < 1e-14);
        // Symmetric in its arguments.
        assert_eq!(ho_exact(zeta, 0.3, -0.8).unwrap(), ho_exact(zeta, -0.8, 0.3).unwrap());
    }
    for x in [0.0f64, 0.4, 1.3, 2.0] {
        let ground = (-x * x as f64).exp() / std::f64::consts::PI.sqrt();
        assert!((ho_exact(50.0, x, x).unwrap() - ground).abs() < 1e-6);
    }
}

#[test]
fn one_slice_form_is_second_order_accurate() {
    let dev = |zeta: f64| {
        let e = ho_exact(zeta, 0.3, 0.3).unwrap();
        ((ho_finite_m(zeta, 1, 0.3, 0.3).unwrap() - e) / e).abs()
    };
    let ratio = dev(0.1) / dev(0.05);
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn three_slices_beat_one_slice() {
    let exact = ho_exact(1.0, 0.5, 0.5).unwrap();
    let e1 = (ho_finite_m(1.0, 1, 0.5, 0.5).unwrap() - exact).abs();
    let e3 = (ho_finite_m(1.0, 3, 0.5, 0.5).unwrap() - exact).abs();
    assert!(e3 < e1, "{e3} !< {e1}");
}

#[test]
fn one_slice_form_matches_single_slice_quadrature() {
    for zeta in [0.3, 1.0, 2.5] {
        let trace = integrate_panels(
            |y| trotter_kernel_one_slice(zeta, y, y).unwrap(),
            &[-40.0, -10.0, -3.0, 0.0, 3.0, 10.0, 40.0],
            60,
        )
        .unwrap();
        for x in [0.0, 0.3, -1.1] {
            let oracle = trotter_kernel_one_slice(zeta, x, x).unwrap() / trace;
            assert!((ho_finite_m(zeta, 1, x, x).unwrap() - oracle).abs() < 1e-10);
        }
    }
}

/// e^{−S} of the open path x₀ … x_M, written out from the action formula.
fn path_weight(zeta: f64, xs: &[f64]) -> f64 {
    let m = (xs.len() - 1) as f64;
    let n = xs.len() - 1;
    let pot = 0.5 * (xs[0] * xs[0] + xs[n] * xs[n]) + xs[1..n].iter().map(|x| x * x).sum::<f64>();
    let kin: f64 = xs.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    (-0.5 * ((zeta / m) * pot + (m / zeta) * kin)).exp()
}

#[test]
fn two_and_three_slice_forms_match_direct_integration() {
    let rule = GaussLegendre::new(24).unwrap();
    let panels = [-20.0, -12.0, -7.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 7.0, 12.0, 20.0];
    let int1 = |g: &dyn Fn(f64) -> f64| -> f64 { panels.windows(2).map(|w| rule.integrate(g, w[0], w[1])).sum() };
    for zeta in [0.5, 1.0, 3.0] {
        // M = 2: one interior bead.
        let k2 = |x: f64, xp: f64| int1(&|y| path_weight(zeta, &[x, y, xp]));
        let z2 = int1(&|x| k2(x, x));
        // M = 3: two interior beads.
        let k3 = |x: f64, xp: f64| int1(&|y1| int1(&|y2| path_weight(zeta, &[x, y1, y2, xp])));
        let z3 = int1(&|x| k3(x, x));
        for (x, xp) in [(0.0, 0.0), (0.5, 0.5), (0.3, -0.2)] {
            let r2 = ho_finite_m(zeta, 2, x, xp).unwrap();
            let r3 = ho_finite_m(zeta, 3, x, xp).unwrap();
            assert!((r2 - k2(x, xp) / z2).abs() < 1e-9, "M=2 zeta {zeta} ({x},{xp}): {r2} vs {}", k2(x, xp) / z2);
            assert!((r3 - k3(x, xp) / z3).abs() < 1e-9, "M=3 zeta {zeta} ({x},{xp}): {r3} vs {}", k3(x, xp) / z3);
        }
    }
}

#[test]
fn real_time_single_slice_propagator_converges() {
    let dev = |theta: f64| {
        let e = ho_propagator_exact(theta, 0.7, 0.7).unwrap();
        (ho_propagator_one_slice(theta, 0.7, 0.7).unwrap() - e).norm() / e.norm()
    };
    let ratio = dev(0.1) / dev(0.05);
    assert!(ratio > 3.4, "ratio {ratio}");
    assert!(dev(0.01) < 1e-3);
}
