use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseComplexMatrix;
use super::vector::{axpy, dot, norm, project_out, StateVector};
use super::C64;
use crate::error::{invalid, Error, Result};

/// Eigenvalues in ascending order with index-aligned orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EigenResult {
    /// Real eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Normalized eigenvectors; `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<StateVector>,
}

impl EigenResult {
    /// Number of eigenpairs.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    /// True when no pairs are stored.
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Keeps only the first `m` pairs.
    pub fn truncate(&mut self, m: usize) {
        self.eigenvalues.truncate(m);
        self.eigenvectors.truncate(m);
    }

    /// max‖H·vₖ − λₖ·vₖ‖ over all stored pairs.
    pub fn max_residual(&self, h: &SparseComplexMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let mut hv = vec![C64::new(0.0, 0.0); v.dim()];
            h.mul_vec_into(v, &mut hv);
            axpy(C64::new(-lam, 0.0), v, &mut hv);
            worst = worst.max(norm(&hv));
        }
        worst
    }

    /// max|⟨vⱼ|vₖ⟩ − δⱼₖ| over all stored pairs.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, a) in self.eigenvectors.iter().enumerate() {
            for (k, b) in self.eigenvectors.iter().enumerate() {
                let d = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - C64::new(d, 0.0)).norm());
            }
        }
        worst
    }
}

/// Settings for [`eigs_smallest`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigsOptions {
    /// Budget of matrix-vector products.
    pub max_iter: usize,
    /// Relative residual target: a pair is converged when
    /// ‖H·v − λ·v‖ < `tol`·‖H‖₁.
    pub tol: f64,
    /// Seed of the random start and restart vectors.
    pub seed: u64,
    /// Number of additional pairs requested at once when a degenerate
    /// cluster is found at the edge of the wanted range.
    pub extra: usize,
    /// Eigenvalues closer than this are treated as degenerate.
    pub degeneracy_gap: f64,
}

impl Default for EigsOptions {
    fn default() -> Self {
        Self { max_iter: 1_000_000, tol: 1e-10, seed: 0x5eed_1a9c_0e5u64, extra: 8, degeneracy_gap: 1e-9 }
    }
}

fn hermitian_tolerance(h: &SparseComplexMatrix) -> f64 {
    1e-12 * h.max_abs().max(1.0)
}

fn check_hermitian(h: &SparseComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    let deviation = h.hermitian_deviation();
    if deviation > hermitian_tolerance(h) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Multiplies `v` by the conjugate phase of its largest-magnitude entry so
/// that this entry becomes real and positive. Ties are broken by the lowest
/// index, which keeps the choice deterministic.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-9)) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Full eigendecomposition of a dense Hermitian matrix.
///
/// Returns ascending eigenvalues and the matching eigenvectors as columns,
/// each with its phase fixed by [`fix_phase`]. The input is symmetrized
/// first, so tiny Hermiticity errors do not matter.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_phase(&mut col);
        for (r, z) in col.into_iter().enumerate() {
            vecs[(r, k)] = z;
        }
    }
    (values, vecs)
}

/// Complete spectrum of a Hermitian matrix by dense diagonalization.
///
/// Eigenvalues are sorted ascending; eigenvectors are orthonormal and carry
/// a real positive largest-magnitude component.
pub fn eigh_dense(h: &SparseComplexMatrix) -> Result<EigenResult> {
    check_hermitian(h)?;
    let (values, vecs) = hermitian_eigen(&h.to_dense());
    let eigenvectors = (0..values.len())
        .map(|k| StateVector::new(vecs.column(k).iter().copied().collect()))
        .collect();
    Ok(EigenResult { eigenvalues: values, eigenvectors })
}

/// The `m` algebraically smallest eigenpairs of a Hermitian matrix.
///
/// Uses a thick-restart Lanczos iteration with full reorthogonalization.
/// A single Krylov space only sees one vector of every degenerate
/// eigenspace, so after the first pass the solver keeps probing the
/// orthogonal complement of everything found so far and adds any pair that
/// lies at or below the current `m`-th eigenvalue (within
/// [`EigsOptions::degeneracy_gap`]). Degenerate clusters at the edge are thus
/// always returned completely before truncation to `m`, so the result does
/// not depend on how the random start vector happened to split a multiplet.
///
/// Convergence means ‖H·v − λ·v‖ < `tol`·‖H‖₁ for every returned pair.
pub fn eigs_smallest(h: &SparseComplexMatrix, m: usize, opts: &EigsOptions) -> Result<EigenResult> {
    check_hermitian(h)?;
    let n = h.nrows();
    if m == 0 || m > n {
        return Err(invalid("number of requested eigenpairs must lie in 1..=dim"));
    }
    let scale = h.norm1().max(f64::MIN_POSITIVE);
    let tol_abs = opts.tol * scale;
    let gap = opts.degeneracy_gap;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget { left: opts.max_iter, spent: 0, worst: f64::INFINITY, scale };

    let first = lanczos_block(h, m, &[], tol_abs, &mut rng, &mut budget)?;
    let mut values = first.values;
    let mut vectors = first.vectors;
    let mut probe_size = 1;
    while vectors.len() < n {
        let found = lanczos_block(h, probe_size, &vectors, tol_abs, &mut rng, &mut budget)?;
        let mut added = 0;
        for (lam, v) in found.values.into_iter().zip(found.vectors) {
            let want = if values.len() >= m { values[m - 1] } else { f64::INFINITY };
            if lam > want + gap {
                break;
            }
            let pos = values.partition_point(|&x| x <= lam);
            values.insert(pos, lam);
            vectors.insert(pos, v);
            added += 1;
        }
        if added == 0 || added < probe_size {
            break;
        }
        probe_size = opts.extra.max(1);
    }

    // A final Rayleigh–Ritz pass over everything found restores exact
    // orthonormality among independently computed blocks.
    let mut result = rayleigh_ritz(h, vectors, &mut budget)?;
    result.truncate(m);
    let residual = result.max_residual(h);
    if residual > 10.0 * tol_abs {
        return Err(Error::NoConvergence { iterations: budget.spent, residual: residual / scale });
    }
    Ok(result)
}

struct Budget {
    left: usize,
    spent: usize,
    /// Worst absolute residual of the latest Ritz pairs.
    worst: f64,
    scale: f64,
}

impl Budget {
    fn take(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::NoConvergence { iterations: self.spent, residual: self.worst / self.scale });
        }
        self.left -= 1;
        self.spent += 1;
        Ok(())
    }
}

struct Block {
    values: Vec<f64>,
    vectors: Vec<StateVector>,
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
        .collect()
}

/// Orthogonalizes `v` (twice, for stability) against the locked vectors and
/// the current basis and returns the remaining norm.
fn reorthogonalize(v: &mut [C64], locked: &[StateVector], basis: &[Vec<C64>]) -> f64 {
    for _ in 0..2 {
        project_out(v, locked.iter().map(|x| &x.amplitudes[..]));
        project_out(v, basis.iter().map(|x| &x[..]));
    }
    norm(v)
}

fn matvec(h: &SparseComplexMatrix, v: &[C64], budget: &mut Budget) -> Result<Vec<C64>> {
    budget.take()?;
    let mut w = vec![C64::new(0.0, 0.0); v.len()];
    h.mul_vec_into(v, &mut w);
    if !w.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("matrix-vector product".into()));
    }
    Ok(w)
}

/// Lowest `nev` eigenpairs of H restricted to the orthogonal complement of
/// `locked` (which must span an invariant subspace).
fn lanczos_block(
    h: &SparseComplexMatrix,
    nev: usize,
    locked: &[StateVector],
    tol_abs: f64,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Result<Block> {
    let n = h.nrows();
    let n_eff = n - locked.len().min(n);
    if n_eff == 0 {
        return Ok(Block { values: Vec::new(), vectors: Vec::new() });
    }
    let nev = nev.min(n_eff);
    let kmax = n_eff.min((2 * nev + 20).max(30));
    let keep = (nev + 5).min(kmax - 1);

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(kmax);
    let mut images: Vec<Vec<C64>> = Vec::with_capacity(kmax);
    // Projected matrix G = V†HV, kept for the whole basis.
    let mut g = DMatrix::<C64>::zeros(kmax, kmax);
    let mut candidate = random_vector(n, rng);
    let mut exhausted = false;

    loop {
        while basis.len() < kmax && !exhausted {
            let before = norm(&candidate);
            let mut after = reorthogonalize(&mut candidate, locked, &basis);
            if !(after > 1e-10 * before) || after == 0.0 {
                // Invariant subspace reached: continue with a fresh direction.
                candidate = random_vector(n, rng);
                let fresh = norm(&candidate);
                after = reorthogonalize(&mut candidate, locked, &basis);
                if after <= 1e-8 * fresh {
                    exhausted = true;
                    break;
                }
            }
            let inv = 1.0 / after;
            for z in candidate.iter_mut() {
                *z *= inv;
            }
            let w = matvec(h, &candidate, budget)?;
            let k = basis.len();
            for (i, b) in basis.iter().enumerate() {
                let gik = dot(b, &w);
                g[(i, k)] = gik;
                g[(k, i)] = gik.conj();
            }
            g[(k, k)] = C64::new(dot(&candidate, &w).re, 0.0);
            basis.push(core::mem::take(&mut candidate));
            candidate = w.clone();
            images.push(w);
        }

        let k = basis.len();
        let sub = g.view((0, 0), (k, k)).into_owned();
        let (theta, s) = hermitian_eigen(&sub);
        let want = nev.min(k);

        // Ritz vectors and their images for the lowest `keep` (or `want`) pairs.
        let take = if exhausted { want } else { keep.max(want).min(k) };
        let mut ritz = Vec::with_capacity(take);
        let mut ritz_images = Vec::with_capacity(take);
        let mut worst: f64 = 0.0;
        for j in 0..take {
            let mut y = vec![C64::new(0.0, 0.0); n];
            let mut hy = vec![C64::new(0.0, 0.0); n];
            for i in 0..k {
                axpy(s[(i, j)], &basis[i], &mut y);
                axpy(s[(i, j)], &images[i], &mut hy);
            }
            if j < want {
                let mut r = hy.clone();
                axpy(C64::new(-theta[j], 0.0), &y, &mut r);
                worst = worst.max(norm(&r));
            }
            ritz.push(y);
            ritz_images.push(hy);
        }
        budget.worst = worst;

        if worst < tol_abs || exhausted || k == n_eff {
            let mut values = Vec::with_capacity(want);
            let mut vectors = Vec::with_capacity(want);
            for (j, mut y) in ritz.into_iter().take(want).enumerate() {
                fix_phase(&mut y);
                values.push(theta[j]);
                vectors.push(StateVector::new(y));
            }
            return Ok(Block { values, vectors });
        }

        // Thick restart: keep the lowest Ritz pairs and continue from the
        // next Lanczos direction, which carries all of their residuals.
        let mut next = images[k - 1].clone();
        reorthogonalize(&mut next, locked, &basis);
        basis = ritz;
        images = ritz_images;
        g.fill(C64::new(0.0, 0.0));
        for j in 0..basis.len() {
            g[(j, j)] = C64::new(theta[j], 0.0);
        }
        candidate = next;
    }
}

/// Rayleigh–Ritz over an arbitrary (nearly orthonormal) set of vectors.
fn rayleigh_ritz(h: &SparseComplexMatrix, vectors: Vec<StateVector>, budget: &mut Budget) -> Result<EigenResult> {
    let n = h.nrows();
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut x = v.amplitudes;
        let before = norm(&x);
        let after = reorthogonalize(&mut x, &[], &basis);
        if after > 1e-8 * before {
            let inv = 1.0 / after;
            x.iter_mut().for_each(|z| *z *= inv);
            basis.push(x);
        }
    }
    let k = basis.len();
    let mut images = Vec::with_capacity(k);
    for b in &basis {
        images.push(matvec(h, b, budget)?);
    }
    let g = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &images[j]));
    let (theta, s) = hermitian_eigen(&g);
    let mut eigenvectors = Vec::with_capacity(k);
    for j in 0..k {
        let mut y = vec![C64::new(0.0, 0.0); n];
        for i in 0..k {
            axpy(s[(i, j)], &basis[i], &mut y);
        }
        let nn = norm(&y);
        y.iter_mut().for_each(|z| *z /= nn);
        fix_phase(&mut y);
        eigenvectors.push(StateVector::new(y));
    }
    Ok(EigenResult { eigenvalues: theta, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{im, re};

    pub(crate) fn example_4x4() -> SparseComplexMatrix {
        let z = re(0.0);
        SparseComplexMatrix::from_dense(
            4,
            4,
            &[z, re(0.3), im(1.0), z, re(0.3), re(1.0), z, z, im(-1.0), z, re(1.0), re(-0.2), z, z, re(-0.2), re(3.0)],
        )
        .unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> SparseComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, re(rng.random::<f64>() * 2.0 - 1.0)));
            for j in i + 1..n {
                let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                t.push((i, j, z));
                t.push((j, i, z.conj()));
            }
        }
        SparseComplexMatrix::from_triplets(n, n, t).unwrap()
    }

    #[test]
    fn four_by_four_spectrum() {
        let r = eigh_dense(&example_4x4()).unwrap();
        let expect = [-0.660442, 0.998322, 1.63842, 3.0237];
        for (a, b) in r.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
        assert!(r.orthonormality_error() < 1e-12);
    }

    #[test]
    fn four_by_four_two_smallest() {
        let r = eigs_smallest(&example_4x4(), 2, &EigsOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r.eigenvalues[0] + 0.660442).abs() < 1e-5);
        assert!((r.eigenvalues[1] - 0.998322).abs() < 1e-5);
    }

    #[test]
    fn diagonal_and_pauli() {
        let d = SparseComplexMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let r = eigh_dense(&d).unwrap();
        assert_eq!(r.eigenvalues, [1.0, 2.0, 3.0]);
        assert!((r.eigenvectors[0][1] - re(1.0)).norm() < 1e-15);
        let lo = eigs_smallest(&d, 1, &EigsOptions::default()).unwrap();
        assert!((lo.eigenvalues[0] - 1.0).abs() < 1e-12);

        let sx = SparseComplexMatrix::from_dense(2, 2, &[re(0.0), re(0.5), re(0.5), re(0.0)]).unwrap();
        let r = eigh_dense(&sx).unwrap();
        assert!((r.eigenvalues[0] + 0.5).abs() < 1e-15 && (r.eigenvalues[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = SparseComplexMatrix::from_dense(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]).unwrap();
        assert!(matches!(eigh_dense(&a), Err(Error::NotHermitian { .. })));
        assert!(matches!(eigs_smallest(&a, 1, &EigsOptions::default()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn lanczos_matches_dense_on_random_64() {
        let h = random_hermitian(64, 7);
        let dense = eigh_dense(&h).unwrap();
        let r = eigs_smallest(&h, 3, &EigsOptions::default()).unwrap();
        for k in 0..3 {
            assert!((r.eigenvalues[k] - dense.eigenvalues[k]).abs() < 1e-8);
        }
        assert!(r.max_residual(&h) < 1e-8 * h.norm1());
        assert!(r.orthonormality_error() < 1e-10);
    }

    #[test]
    fn lanczos_resolves_exact_degeneracy() {
        // Two copies of the same block: every eigenvalue is doubly degenerate.
        let a = random_hermitian(40, 3);
        let i2 = SparseComplexMatrix::identity(2);
        let h = crate::linalg::kron(&[&i2, &a]).unwrap();
        let dense = eigh_dense(&h).unwrap();
        let r = eigs_smallest(&h, 3, &EigsOptions::default()).unwrap();
        for k in 0..3 {
            assert!((r.eigenvalues[k] - dense.eigenvalues[k]).abs() < 1e-8);
        }
        assert!((r.eigenvalues[0] - r.eigenvalues[1]).abs() < 1e-9);
    }

    #[test]
    fn starved_budget_reports_no_convergence() {
        let h = random_hermitian(200, 11);
        let opts = EigsOptions { max_iter: 5, ..EigsOptions::default() };
        assert!(matches!(eigs_smallest(&h, 2, &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn phase_convention() {
        let r = eigh_dense(&example_4x4()).unwrap();
        for v in &r.eigenvectors {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bm), (i, z)| if z.norm() > bm * (1.0 + 1e-9) { (i, z.norm()) } else { (bi, bm) });
            assert!(v[imax].im.abs() < 1e-14 && v[imax].re > 0.0);
        }
    }
}
