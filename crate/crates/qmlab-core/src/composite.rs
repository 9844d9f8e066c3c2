//! Tensor-product Hilbert spaces: embedding single-site operators, product
//! states, reduced density matrices and entanglement entropy.
//!
//! Sites are numbered from 0. A composite basis index is row-major with
//! site 0 varying slowest, which is the same convention as
//! [`kron`](crate::linalg::kron).

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, kron, kron_vectors, SparseComplexMatrix, StateVector, C64};
use crate::math::*;

/// Per-site dimensions of a composite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteLayout {
    dims: Vec<usize>,
}

impl SiteLayout {
    /// Layout with the given site dimensions (each at least 1).
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(invalid("site dimensions must be a non-empty list of positive counts"));
        }
        if dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).is_none() {
            return Err(invalid("total dimension overflows"));
        }
        Ok(Self { dims })
    }

    /// `n` identical sites of dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(alloc::vec![d; n])
    }

    /// Site dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of sites.
    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    /// Dimension of the full space Π dᵢ.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimension of sites `0..k`.
    pub fn prefix_dim(&self, k: usize) -> usize {
        self.dims[..k].iter().product()
    }
}

/// Places `a` at `site` and identities everywhere else.
pub fn embed(layout: &SiteLayout, site: usize, a: &SparseComplexMatrix) -> Result<SparseComplexMatrix> {
    embed_product(layout, &[(site, a)])
}

/// Tensor product of the given single-site operators (identity on all
/// other sites). Sites must be distinct.
pub fn embed_product(layout: &SiteLayout, ops: &[(usize, &SparseComplexMatrix)]) -> Result<SparseComplexMatrix> {
    let mut slot: Vec<Option<&SparseComplexMatrix>> = alloc::vec![None; layout.n_sites()];
    for &(site, a) in ops {
        if site >= layout.n_sites() {
            return Err(invalid("site index out of range"));
        }
        if slot[site].is_some() {
            return Err(invalid("site listed twice"));
        }
        let d = layout.dims[site];
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: a.nrows().max(a.ncols()) });
        }
        slot[site] = Some(a);
    }
    // Consecutive identity sites are merged into one identity factor.
    let mut factors: Vec<SparseComplexMatrix> = Vec::new();
    let mut pending = 1usize;
    for (site, op) in slot.iter().enumerate() {
        match op {
            Some(a) => {
                if pending > 1 {
                    factors.push(SparseComplexMatrix::identity(pending));
                }
                pending = 1;
                factors.push((*a).clone());
            }
            None => pending *= layout.dims[site],
        }
    }
    if pending > 1 || factors.is_empty() {
        factors.push(SparseComplexMatrix::identity(pending));
    }
    let refs: Vec<&SparseComplexMatrix> = factors.iter().collect();
    kron(&refs)
}

/// Flattened tensor product |ψ₁⟩⊗|ψ₂⟩⊗⋯.
pub fn product_state(states: &[&StateVector]) -> Result<StateVector> {
    if states.iter().any(|s| s.norm_sqr() == 0.0) {
        return Err(invalid("product state factor is the zero vector"));
    }
    let slices: Vec<&[C64]> = states.iter().map(|s| &s.amplitudes[..]).collect();
    kron_vectors(&slices)
}

/// A dense density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    /// Matrix entries ρ_{ij}.
    pub entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a square matrix without validation.
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        Ok(Self { entries })
    }

    /// Projector |ψ⟩⟨ψ| onto a normalized pure state.
    pub fn pure(psi: &StateVector) -> Self {
        let n = psi.dim();
        Self { entries: DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj()) }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry ρ_{ij}.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    /// Tr ρ.
    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues of ρ, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.entries).0
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues ≥ −1e-10).
    pub fn is_valid(&self) -> bool {
        let herm = (&self.entries - self.entries.adjoint()).iter().all(|z| z.norm() <= 1e-12);
        let tr = (self.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10;
        herm && tr && self.eigenvalues().iter().all(|&l| l >= -1e-10)
    }
}

fn check_state(psi: &StateVector, layout: &SiteLayout) -> Result<()> {
    if psi.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: psi.dim() });
    }
    let n2 = psi.norm_sqr();
    if !n2.is_finite() {
        return Err(Error::NonFinite("state".into()));
    }
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(invalid("state must be normalized"));
    }
    Ok(())
}

/// Reduced density matrix of a bipartition psi = Σ φ_{a,b}|a⟩⊗|b⟩ with
/// `da` rows: keeps the first (`keep_first`) or the second factor.
fn reduce(psi: &[C64], da: usize, keep_first: bool) -> DensityMatrix {
    let db = psi.len() / da;
    // φ is stored row-major: psi[a·db + b].
    let phi = DMatrix::from_fn(da, db, |a, b| psi[a * db + b]);
    let entries = if keep_first {
        &phi * phi.adjoint()
    } else {
        // ρ_B[b,b'] = Σ_a φ_{a,b} φ*_{a,b'} = (φᵀ φ*)_{b,b'}.
        phi.transpose() * phi.map(|z| z.conj())
    };
    DensityMatrix { entries }
}

/// Density matrix of sites `0..k`, tracing out the rest.
pub fn reduced_density_prefix(psi: &StateVector, layout: &SiteLayout, k: usize) -> Result<DensityMatrix> {
    check_state(psi, layout)?;
    if k == 0 || k > layout.n_sites() {
        return Err(invalid("prefix length must lie in 1..=n_sites"));
    }
    Ok(reduce(psi, layout.prefix_dim(k), true))
}

/// Density matrix of sites `k..N`, tracing out sites `0..k`.
pub fn reduced_density_suffix(psi: &StateVector, layout: &SiteLayout, k: usize) -> Result<DensityMatrix> {
    check_state(psi, layout)?;
    if k >= layout.n_sites() {
        return Err(invalid("suffix start must lie in 0..n_sites"));
    }
    Ok(reduce(psi, layout.prefix_dim(k), false))
}

/// Density matrix of site 0 with all other sites traced out.
pub fn reduced_density_first_site(psi: &StateVector, layout: &SiteLayout) -> Result<DensityMatrix> {
    reduced_density_prefix(psi, layout, 1)
}

/// Density matrix of the last site with all other sites traced out.
pub fn reduced_density_last_site(psi: &StateVector, layout: &SiteLayout) -> Result<DensityMatrix> {
    reduced_density_suffix(psi, layout, layout.n_sites() - 1)
}

/// Von Neumann entropy −Σ λ log₂ λ in bits, with eigenvalues clamped to
/// [0, 1] and 0·log 0 = 0.
pub fn entanglement_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .map(|l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * log2(l))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;
    use crate::spin::{sid, sx, sz, SpinSpec};

    #[test]
    fn embed_on_single_site_layout() {
        let s = SpinSpec::new(3);
        let layout = SiteLayout::new(alloc::vec![4, 1]).unwrap();
        assert_eq!(embed(&layout, 0, &sz(s)).unwrap(), sz(s));
    }

    #[test]
    fn embed_hyperfine_layout_diagonal() {
        let layout = SiteLayout::new(alloc::vec![4, 2, 1]).unwrap();
        let m = embed(&layout, 0, &sz(SpinSpec::new(3))).unwrap();
        let d: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, [1.5, 1.5, 0.5, 0.5, -0.5, -0.5, -1.5, -1.5]);
    }

    #[test]
    fn embeds_on_different_sites_commute() {
        let s = SpinSpec::new(2);
        let layout = SiteLayout::uniform(3, 3).unwrap();
        let a = embed(&layout, 0, &sx(s)).unwrap();
        let b = embed(&layout, 2, &sx(s)).unwrap();
        assert!(a.commutator(&b).unwrap().max_abs() < 1e-12);
        let c = embed_product(&layout, &[(1, &sid(s))]).unwrap();
        assert_eq!(c, SparseComplexMatrix::identity(27));
    }

    #[test]
    fn embed_rejects_wrong_dimension() {
        let layout = SiteLayout::uniform(2, 2).unwrap();
        assert!(embed(&layout, 0, &sz(SpinSpec::new(2))).is_err());
        assert!(embed(&layout, 2, &sz(SpinSpec::half())).is_err());
    }

    #[test]
    fn singlet_reduces_to_identity_over_two() {
        let r = 1.0 / sqrt(2.0);
        let psi = StateVector::from_real(&[0.0, r, -r, 0.0]);
        let layout = SiteLayout::uniform(2, 2).unwrap();
        for rho in [
            reduced_density_first_site(&psi, &layout).unwrap(),
            reduced_density_last_site(&psi, &layout).unwrap(),
        ] {
            assert!((rho.get(0, 0) - re(0.5)).norm() < 1e-15);
            assert!((rho.get(1, 1) - re(0.5)).norm() < 1e-15);
            assert!(rho.get(0, 1).norm() < 1e-15);
            assert!((entanglement_entropy(&rho) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_is_pure_after_reduction() {
        let u = StateVector::from_real(&[0.6, 0.8]);
        let v = StateVector::from_real(&[0.0, 1.0, 0.0]);
        let psi = product_state(&[&u, &v]).unwrap();
        let layout = SiteLayout::new(alloc::vec![2, 3]).unwrap();
        let rho = reduced_density_first_site(&psi, &layout).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(rho.is_valid());
        assert!(entanglement_entropy(&rho).abs() < 1e-10);
        let rho_b = reduced_density_last_site(&psi, &layout).unwrap();
        assert!((rho_b.get(1, 1) - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn empty_product_is_error() {
        assert!(product_state(&[]).is_err());
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let layout = SiteLayout::uniform(2, 2).unwrap();
        assert!(reduced_density_first_site(&StateVector::from_real(&[1.0, 1.0, 0.0, 0.0]), &layout).is_err());
    }
}
