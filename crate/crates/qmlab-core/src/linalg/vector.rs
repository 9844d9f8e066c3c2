use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use super::C64;
use crate::error::{invalid, Error, Result};
use crate::math::*;

/// Dense vector of complex basis amplitudes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector {
    /// Amplitudes ψᵢ = ⟨i|ψ⟩.
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps a list of amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// The zero vector of length `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); dim])
    }

    /// Canonical basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[index] = C64::new(1.0, 0.0);
        v
    }

    /// Vector with real amplitudes.
    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Number of amplitudes.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Σ|ψᵢ|².
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sqr())
    }

    /// Rescales to unit norm; fails on the zero vector or non-finite input.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() {
            return Err(Error::NonFinite("state norm".into()));
        }
        if n == 0.0 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        let s = 1.0 / n;
        for z in &mut self.amplitudes {
            *z *= s;
        }
        Ok(())
    }

    /// Consuming variant of [`normalize`](Self::normalize).
    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Inner product ⟨self|other⟩ (conjugate-linear in `self`).
    pub fn inner(&self, other: &StateVector) -> C64 {
        dot(&self.amplitudes, &other.amplitudes)
    }

    /// |⟨self|other⟩|².
    pub fn overlap_sqr(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Multiplies every amplitude by `s`.
    pub fn scaled(&self, s: C64) -> StateVector {
        Self::new(self.amplitudes.iter().map(|z| z * s).collect())
    }

    /// True if every amplitude is finite.
    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for StateVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.amplitudes
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }
}

impl From<Vec<C64>> for StateVector {
    fn from(amplitudes: Vec<C64>) -> Self {
        Self::new(amplitudes)
    }
}

/// Flattened tensor product of vectors, leftmost factor varying slowest.
pub fn kron_vectors(factors: &[&[C64]]) -> Result<StateVector> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| invalid("tensor product of an empty list"))?;
    let mut acc: Vec<C64> = first.to_vec();
    for f in rest {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for a in &acc {
            next.extend(f.iter().map(|b| a * b));
        }
        acc = next;
    }
    Ok(StateVector::new(acc))
}

// ---- small dense kernels shared by the solvers -------------------------

/// ⟨a|b⟩ = Σ conj(aᵢ)·bᵢ.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        s += x.conj() * y;
    }
    s
}

/// y ← y + α·x.
pub(crate) fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    sqrt(a.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Removes the components of `v` along each (orthonormal) vector in `basis`.
pub(crate) fn project_out<'a>(v: &mut [C64], basis: impl IntoIterator<Item = &'a [C64]>) {
    for b in basis {
        let c = dot(b, v);
        axpy(-c, b, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_two_qubit_states() {
        let a = [C64::new(0.8, 0.0), C64::new(-0.6, 0.0)];
        let b = [C64::new(0.0, 0.6), C64::new(0.8, 0.0)];
        let p = kron_vectors(&[&a, &b]).unwrap();
        let expect = [
            C64::new(0.0, 0.48),
            C64::new(0.64, 0.0),
            C64::new(0.0, -0.36),
            C64::new(-0.48, 0.0),
        ];
        for (x, y) in p.iter().zip(expect.iter()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(StateVector::zeros(3).normalize().is_err());
    }
}
