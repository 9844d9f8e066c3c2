use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::eigen::hermitian_eigen;
use super::sparse::SparseComplexMatrix;
use super::vector::{axpy, dot, norm, StateVector};
use super::C64;
use crate::error::{Error, Result};
use crate::math::*;

/// Largest dimension for which [`expm_action`] exponentiates a dense copy;
/// bigger matrices use a Krylov approximation.
pub const DENSE_EXPM_MAX_DIM: usize = 4096;

/// Krylov subspace size of the large-matrix path.
const KRYLOV_DIM: usize = 50;

/// Dense matrix exponential exp(A) by scaling and squaring with a Taylor
/// series.
///
/// A is divided by 2ˢ until ‖A/2ˢ‖₁ ≤ ½, the series is summed until the
/// next term drops below 1e-17 relative to the partial sum, and the result
/// is squared s times.
pub fn expm_dense(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    if norm1 > 0.5 {
        s = ceil(log2(norm1 / 0.5)) as u32;
    }
    let b = a * C64::new(1.0 / pow(2.0, s as f64), 0.0);
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..60 {
        term = &term * &b * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-17 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// exp(scale·H)·v for a Hermitian H.
///
/// Matrices up to [`DENSE_EXPM_MAX_DIM`] are exponentiated densely; larger
/// ones use Lanczos (Krylov) steps of at most 50 vectors, splitting the
/// interval so that |scale|·‖H‖₁ ≤ 8 per step. For purely imaginary `scale`
/// the result keeps the norm of `v`.
pub fn expm_action(h: &SparseComplexMatrix, scale: C64, v: &StateVector) -> Result<StateVector> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
    }
    if v.dim() != h.ncols() {
        return Err(Error::DimensionMismatch { expected: h.ncols(), found: v.dim() });
    }
    if !(scale.re.is_finite() && scale.im.is_finite()) || !v.is_finite() {
        return Err(Error::NonFinite("exponential argument".into()));
    }
    let out = if h.nrows() <= DENSE_EXPM_MAX_DIM {
        let u = expm_dense(&(h.to_dense() * scale));
        let x = nalgebra::DVector::from_column_slice(v);
        StateVector::new((u * x).iter().copied().collect())
    } else {
        krylov_action(h, scale, v)
    };
    if !out.is_finite() {
        return Err(Error::NonFinite("matrix exponential".into()));
    }
    Ok(out)
}

fn krylov_action(h: &SparseComplexMatrix, scale: C64, v: &StateVector) -> StateVector {
    let n = h.nrows();
    let nsub = ceil(scale.norm() * h.norm1() / 8.0).max(1.0) as usize;
    let tau = scale / nsub as f64;
    let mut x = v.amplitudes.clone();
    for _ in 0..nsub {
        let beta = norm(&x);
        if beta == 0.0 {
            break;
        }
        let k = KRYLOV_DIM.min(n);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k);
        let mut t = DMatrix::<C64>::zeros(k, k);
        let mut q: Vec<C64> = x.iter().map(|z| z / beta).collect();
        let mut used = 0;
        for j in 0..k {
            let mut w = vec![C64::new(0.0, 0.0); n];
            h.mul_vec_into(&q, &mut w);
            basis.push(q);
            used = j + 1;
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    t[(i, j)] += c;
                    axpy(-c, b, &mut w);
                }
            }
            let nw = norm(&w);
            if j + 1 == k || nw < 1e-13 * beta.max(1.0) {
                break;
            }
            t[(j + 1, j)] = C64::new(nw, 0.0);
            q = w.iter().map(|z| z / nw).collect();
        }
        let tk = t.view((0, 0), (used, used)).into_owned();
        // Hermitian projection: exponentiate through its eigenbasis.
        let (theta, s) = hermitian_eigen(&tk);
        let mut coeff = vec![C64::new(0.0, 0.0); used];
        for (m, &th) in theta.iter().enumerate() {
            let e = (tau * th).exp() * s[(0, m)].conj() * beta;
            for (i, c) in coeff.iter_mut().enumerate() {
                *c += s[(i, m)] * e;
            }
        }
        let mut next = vec![C64::new(0.0, 0.0); n];
        for (c, b) in coeff.iter().zip(&basis) {
            axpy(*c, b, &mut next);
        }
        x = next;
    }
    StateVector::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh_dense, im, re};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64, density: f64) -> SparseComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, re(rng.random::<f64>() * 2.0 - 1.0)));
            for j in i + 1..n {
                if rng.random::<f64>() < density {
                    let z = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    t.push((i, j, z));
                    t.push((j, i, z.conj()));
                }
            }
        }
        SparseComplexMatrix::from_triplets(n, n, t).unwrap()
    }

    fn spectral_oracle(h: &SparseComplexMatrix, scale: C64, v: &StateVector) -> Vec<C64> {
        let e = eigh_dense(h).unwrap();
        let mut out = vec![re(0.0); v.dim()];
        for (lam, u) in e.eigenvalues.iter().zip(&e.eigenvectors) {
            let c = u.inner(v) * (scale * lam).exp();
            axpy(c, u, &mut out);
        }
        out
    }

    #[test]
    fn zero_matrix_is_identity() {
        let v = StateVector::new(vec![re(0.6), im(0.8)]);
        let out = expm_action(&SparseComplexMatrix::zeros(2, 2), im(-3.0), &v).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn half_sigma_z_phases() {
        let h = SparseComplexMatrix::from_real_diagonal(&[0.5, -0.5]);
        let v = StateVector::new(vec![re(1.0), re(1.0)]);
        let out = expm_action(&h, im(-PI), &v).unwrap();
        assert!((out[0] - C64::new(0.0, -PI / 2.0).exp()).norm() < 1e-14);
        assert!((out[1] - C64::new(0.0, PI / 2.0).exp()).norm() < 1e-14);
    }

    #[test]
    fn dense_matches_spectral_oracle() {
        let h = random_hermitian(8, 5, 1.0);
        let v = StateVector::new((0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect());
        for scale in [im(-2.7), re(-0.9), C64::new(-0.3, 1.1)] {
            let a = expm_action(&h, scale, &v).unwrap();
            let b = spectral_oracle(&h, scale, &v);
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn krylov_matches_dense() {
        let h = random_hermitian(300, 9, 0.02);
        let v = StateVector::new((0..300).map(|k| C64::new(sin(k as f64), cos(3.0 * k as f64))).collect())
            .normalized()
            .unwrap();
        let scale = im(-4.0);
        let a = krylov_action(&h, scale, &v);
        let b = expm_action(&h, scale, &v).unwrap();
        let err = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!((a.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let h = SparseComplexMatrix::identity(3);
        assert!(expm_action(&h, im(1.0), &StateVector::zeros(2)).is_err());
    }
}
