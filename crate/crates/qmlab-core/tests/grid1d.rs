//! Box-grid checks: DST-I against its matrix, operator conversion and the
//! step-well benchmark.

use qmlab_core::grid1d::*;
use qmlab_core::linalg::{eigh_dense, re, C64};

fn rand_vec(n: usize, seed: u64) -> Vec<C64> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    (0..n).map(|_| C64::new(next(), next())).collect()
}

#[test]
fn dst_matches_explicit_sum_for_n7() {
    let n = 7;
    let v = rand_vec(n, 3);
    let out = dst1(&v);
    for (k, o) in out.iter().enumerate() {
        let kk = (k + 1) as f64;
        let direct: C64 = v
            .iter()
            .enumerate()
            .map(|(j, x)| x * ((2.0 / 8.0f64).sqrt() * (std::f64::consts::PI * kk * (j + 1) as f64 / 8.0).sin()))
            .sum();
        assert!((o - direct).norm() < 1e-12);
    }
}

#[test]
fn dst_is_involutive_on_both_paths() {
    for n in [1usize, 5, 64, 65, 100, 255] {
        let v = rand_vec(n, n as u64);
        let w = dst1(&dst1(&v));
        assert!(v.iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-12), "n={n}");
    }
}

#[test]
fn first_momentum_column_maps_to_unit_vector() {
    let n = 9;
    let x = dst_matrix(n);
    let col: Vec<C64> = (0..n).map(|j| re(x[(j, 0)])).collect();
    let e = dst1(&col);
    assert!((e[0] - re(1.0)).norm() < 1e-12);
    assert!(e[1..].iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn kinetic_position_spectrum() {
    let g = Grid1D::new(12).unwrap();
    let k = kinetic_position(&g);
    assert!(k.is_hermitian(1e-12));
    let e = eigh_dense(&k).unwrap();
    for (i, v) in e.eigenvalues.iter().enumerate() {
        assert!((v - ((i + 1) * (i + 1)) as f64).abs() < 1e-10);
    }
}

#[test]
fn kinetic_position_three_by_three() {
    // X for n = 3 has entries √½·sin(πnj/4); hand-multiplied X·diag(1,4,9)·X.
    let g = Grid1D::new(3).unwrap();
    let k = kinetic_position(&g).to_dense();
    let r = -2.0 * 2f64.sqrt();
    let expected = [[4.5, r, 0.5], [r, 5.0, r], [0.5, r, 4.5]];
    for r in 0..3 {
        for c in 0..3 {
            assert!((k[(r, c)].re - expected[r][c]).abs() < 1e-12, "({r},{c})");
        }
    }
}

#[test]
fn operator_conversion_round_trip() {
    let n = 10;
    let v = rand_vec(n * n, 11);
    let u = nalgebra::DMatrix::from_row_slice(n, n, &v);
    let back = convert_operator(&convert_operator(&u).unwrap()).unwrap();
    assert!((back - u).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn potential_on_grid() {
    let g = Grid1D::new(10).unwrap();
    let w = potential_position(&g, stepwell_potential(3.0)).unwrap();
    let d = w.diagonal();
    assert!(d[..5].iter().all(|z| *z == re(3.0)));
    assert!(d[5..].iter().all(|z| *z == re(0.0)));
    assert_eq!(potential_position(&g, |_| 0.0).unwrap().nnz(), 0);
    assert!(potential_position(&g, |x| 1.0 / (x - x)).is_err());
    let h = potential_samples(&g, |x| 500.0 * (x - 0.5) * (x - 0.5)).unwrap();
    for j in 0..10 {
        assert!((h[j] - h[9 - j]).abs() < 1e-12);
    }
}

#[test]
fn density_interpolation() {
    let g = Grid1D::new(20).unwrap();
    let mut e = vec![re(0.0); 20];
    e[4] = re(1.0);
    let d = interpolate_density(&g, &e).unwrap();
    assert_eq!(d.len(), 22);
    assert_eq!(d[5], (5.0 / 21.0, 21.0));
    // Ground momentum mode sampled on the grid.
    let mut u = vec![re(0.0); 20];
    u[0] = re(1.0);
    let v = dst1(&u);
    let d = interpolate_density(&g, &v).unwrap();
    for &(x, rho) in &d[1..21] {
        let s = (std::f64::consts::PI * x).sin();
        assert!((rho - 2.0 * s * s).abs() < 1e-10);
    }
    let trap: f64 = d.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
    assert!((trap - 1.0).abs() < 2.0 / 21.0);
}

#[test]
fn stepwell_analytic_values() {
    let s = stepwell_analytic(2.0).unwrap();
    assert!((s.k2 - 1.32884).abs() < 1e-4);
    assert!((s.k1 - 0.48392).abs() < 1e-4);
    // Amplitudes printed alongside the plotted solution.
    assert!((s.a - 1.6088142613650431).abs() < 1e-8);
    assert!((s.b - 1.5458263302568298).abs() < 1e-8);
    let (dv, dd) = s.matching_residuals();
    assert!(dv.abs() < 1e-8 && dd.abs() < 1e-8);
    let rule = qmlab_core::quad::GaussLegendre::new(60).unwrap();
    let norm = rule.integrate(|x| s.psi(x).powi(2), 0.0, 0.5) + rule.integrate(|x| s.psi(x).powi(2), 0.5, 1.0);
    assert!((norm - 1.0).abs() < 1e-8);
}

#[test]
fn stepwell_convergence_exponents() {
    let ns: Vec<usize> = (8..=32).step_by(2).collect();
    for method in [StepWellMethod::Momentum, StepWellMethod::Mixed] {
        let inf: Vec<f64> = ns.iter().map(|&n| stepwell_infidelity(2.0, n, method).unwrap()).collect();
        assert!(inf.windows(2).all(|w| w[1] < w[0]), "{method:?}: {inf:?}");
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let (_, p) = fit_power_law(&xs, &inf).unwrap();
        assert!((-5.0..=-3.0).contains(&p), "{method:?}: exponent {p}");
    }
}

#[test]
fn momentum_and_mixed_energies_approach_analytic() {
    let s = stepwell_analytic(2.0).unwrap();
    let (e_m, _) = stepwell_ground(2.0, 64, StepWellMethod::Momentum).unwrap();
    let (e_p, _) = stepwell_ground(2.0, 64, StepWellMethod::Mixed).unwrap();
    assert!((e_m - s.energy()).abs() < 1e-3);
    assert!((e_p - s.energy()).abs() < 1e-2);
}
