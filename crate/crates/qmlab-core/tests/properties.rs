//! Property suites: algebraic identities and conservation laws checked on
//! randomly generated inputs.

use nalgebra::DMatrix;
use proptest::prelude::*;
use qmlab_core::composite::{reduced_density_prefix, reduced_density_suffix, SiteLayout};
use qmlab_core::dynamics::{propagate_real, SplitStepPlan};
use qmlab_core::grid1d::{dst1, dst_matrix, potential_samples, Grid1D};
use qmlab_core::linalg::{eigh_dense, eigs_smallest, kron, EigsOptions};
use qmlab_core::pimc::{Path, PathKind, Rng};
use qmlab_core::spin::{sid, sx, sy, sz, SpinSpec};
use qmlab_core::{SparseComplexMatrix, StateVector, C64};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), len)
}

fn random_matrix(n: usize, density: f64) -> impl Strategy<Value = SparseComplexMatrix> {
    prop::collection::vec((0.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |cells| {
        let entries: Vec<_> = cells
            .iter()
            .enumerate()
            .filter(|(_, (keep, _, _))| *keep < density)
            .map(|(k, (_, a, b))| (k / n, k % n, C64::new(*a, *b)))
            .collect();
        SparseComplexMatrix::from_triplets(n, n, entries).unwrap()
    })
}

fn hermitian(n: usize) -> impl Strategy<Value = SparseComplexMatrix> {
    random_matrix(n, 0.4).prop_map(|a| a.add(&a.adjoint()).unwrap())
}

fn max_diff(a: &SparseComplexMatrix, b: &SparseComplexMatrix) -> f64 {
    a.max_abs_diff(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spin_casimir_and_commutators(two_s in 1u32..=12) {
        let s = SpinSpec::new(two_s);
        let (x, y, z) = (sx(s), sy(s), sz(s));
        let casimir = SparseComplexMatrix::lin_comb(&[
            (C64::new(1.0, 0.0), &x.matmul(&x).unwrap()),
            (C64::new(1.0, 0.0), &y.matmul(&y).unwrap()),
            (C64::new(1.0, 0.0), &z.matmul(&z).unwrap()),
        ]).unwrap();
        let expected = sid(s).scale_real(s.s() * (s.s() + 1.0));
        prop_assert!(max_diff(&casimir, &expected) < 1e-10);
        let i = C64::new(0.0, 1.0);
        prop_assert!(max_diff(&x.commutator(&y).unwrap(), &z.scale(i)) < 1e-12);
        prop_assert!(max_diff(&y.commutator(&z).unwrap(), &x.scale(i)) < 1e-12);
        prop_assert!(max_diff(&z.commutator(&x).unwrap(), &y.scale(i)) < 1e-12);
        prop_assert!(x.is_hermitian(1e-14) && y.is_hermitian(1e-14) && z.is_hermitian(1e-14));
    }

    #[test]
    fn kron_is_associative(a in random_matrix(2, 0.7), b in random_matrix(3, 0.5), c in random_matrix(2, 0.7)) {
        let left = kron(&[&kron(&[&a, &b]).unwrap(), &c]).unwrap();
        let right = kron(&[&a, &kron(&[&b, &c]).unwrap()]).unwrap();
        let flat = kron(&[&a, &b, &c]).unwrap();
        prop_assert!(max_diff(&left, &right) < 1e-14);
        prop_assert!(max_diff(&left, &flat) < 1e-14);
    }

    #[test]
    fn dst_is_an_orthogonal_involution(v in (1usize..200).prop_flat_map(complex_vec)) {
        let w = dst1(&v);
        let back = dst1(&w);
        let n0: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((n0 - n1).abs() < 1e-10 * (1.0 + n0));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn dst_matrix_is_symmetric_orthogonal(n in 1usize..40) {
        let s = dst_matrix(n);
        prop_assert!((&s - s.transpose()).abs().max() < 1e-15);
        prop_assert!((&s * &s - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-12);
    }

    #[test]
    fn partial_traces_preserve_the_trace(
        dims in prop::collection::vec(2usize..4, 2..4),
        seed in any::<u64>(),
        k_frac in 0.0f64..1.0,
    ) {
        let layout = SiteLayout::new(dims.clone()).unwrap();
        let mut rng = Rng::seed(seed);
        let amps: Vec<C64> = (0..layout.total_dim()).map(|_| C64::new(rng.uniform() - 0.5, rng.uniform() - 0.5)).collect();
        let psi = StateVector::new(amps).normalized().unwrap();
        let k = 1 + ((dims.len() - 1) as f64 * k_frac) as usize;
        let a = reduced_density_prefix(&psi, &layout, k).unwrap();
        let b = reduced_density_suffix(&psi, &layout, k).unwrap();
        prop_assert!((a.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((b.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(a.is_valid() && b.is_valid());
        // A pure state's two halves share their spectrum.
        prop_assert!((a.purity() - b.purity()).abs() < 1e-10);
    }

    #[test]
    fn real_time_split_step_conserves_the_norm(
        n in 4usize..40,
        seed in any::<u64>(),
        g in -5.0f64..5.0,
        depth in 0.0f64..500.0,
        dt in 1e-4f64..1e-2,
    ) {
        let grid = Grid1D::new(n).unwrap();
        let w = potential_samples(&grid, |x| depth * (x - 0.5) * (x - 0.5)).unwrap();
        let plan = SplitStepPlan::new_1d(&grid, w, g).unwrap();
        let mut rng = Rng::seed(seed);
        let psi = StateVector::new((0..n).map(|_| C64::new(rng.uniform() - 0.5, rng.uniform() - 0.5)).collect())
            .normalized()
            .unwrap();
        let out = propagate_real(&plan, &psi, dt, 50).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rng_streams_are_deterministic(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = Rng::stream(seed, stream);
        let mut b = Rng::stream(seed, stream);
        for _ in 0..64 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        let mut c = Rng::seed(seed);
        let mut d = Rng::seed(seed);
        for _ in 0..64 {
            prop_assert_eq!(c.index(0, 1000), d.index(0, 1000));
        }
    }

    #[test]
    fn lanczos_agrees_with_dense(h in hermitian(24), m in 1usize..4) {
        let dense = eigh_dense(&h).unwrap();
        let sparse = eigs_smallest(&h, m, &EigsOptions::default()).unwrap();
        for k in 0..m {
            prop_assert!((dense.eigenvalues[k] - sparse.eigenvalues[k]).abs() < 1e-8 * (1.0 + h.max_abs()));
        }
    }

    #[test]
    fn path_moves_change_the_action_locally(
        beads in prop::collection::vec(-3.0f64..3.0, 3..12),
        zeta in 0.05f64..20.0,
        dx in -1.0f64..1.0,
        pick in 0.0f64..1.0,
    ) {
        let ring = Path::from_beads(beads.clone(), PathKind::Closed, zeta).unwrap();
        let i = ((beads.len() as f64 * pick) as usize).min(beads.len() - 1);
        let mut moved = beads.clone();
        moved[i] += dx;
        let after = Path::from_beads(moved, PathKind::Closed, zeta).unwrap();
        prop_assert!((after.action() - ring.action() - ring.bead_move_delta(i, dx)).abs() < 1e-9 * (1.0 + ring.action()));

        let shifted = Path::from_beads(beads.iter().map(|x| x + dx).collect(), PathKind::Closed, zeta).unwrap();
        prop_assert!((shifted.kinetic_action() - ring.kinetic_action()).abs() < 1e-9 * (1.0 + ring.kinetic_action()));
        prop_assert!((shifted.action() - ring.action() - ring.shift_delta(dx)).abs() < 1e-9 * (1.0 + ring.action()));
        prop_assert!(ring.action() >= 0.0);
    }
}
