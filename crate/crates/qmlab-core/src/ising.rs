//! Rings of N spin-S systems in a transverse field: the transverse Ising
//! model and its XY and Heisenberg relatives.
//!
//! H_Ising = −(b/2) Σₖ Sx⁽ᵏ⁾ − Σₖ Sz⁽ᵏ⁾ Sz⁽ᵏ⁺¹⁾,
//! H_XY = −(b/2) Σₖ Sz⁽ᵏ⁾ − Σₖ (Sx⁽ᵏ⁾ Sx⁽ᵏ⁺¹⁾ + Sy⁽ᵏ⁾ Sy⁽ᵏ⁺¹⁾),
//! H_Heisenberg = −(b/2) Σₖ Sz⁽ᵏ⁾ − Σₖ S⁽ᵏ⁾·S⁽ᵏ⁺¹⁾,
//!
//! with site N identified with site 0. Sites are numbered 0..N.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::composite::{embed, embed_product, entanglement_entropy, product_state, reduced_density_last_site, SiteLayout};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigs_smallest, re, EigenResult, EigsOptions, SparseComplexMatrix, StateVector, C64};
use crate::math::*;
use crate::spin::{sx, sy, sz, xdn, xup, zdn, zup, SpinSpec};

/// Largest Hilbert-space dimension a ring may have.
pub const MAX_DIM: usize = 1 << 22;

/// Energy window below which eigenstates count as one degenerate ground
/// manifold when selecting the reported ground state.
pub const GROUND_MANIFOLD_WINDOW: f64 = 1e-7;

/// Below this |b| at least [`SMALL_FIELD_STATES`] eigenpairs are computed
/// so that the quasi-degenerate ground manifold is fully resolved.
pub const SMALL_FIELD: f64 = 0.25;

/// Number of eigenpairs requested for |b| < [`SMALL_FIELD`].
pub const SMALL_FIELD_STATES: usize = 10;

/// Spin–spin coupling of the ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coupling {
    /// −Sz Sz coupling with a transverse field along x.
    Ising,
    /// −(Sx Sx + Sy Sy) coupling with a field along z.
    Xy,
    /// −S·S coupling with a field along z.
    Heisenberg,
}

/// A ring of spins with a uniform field b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingModel {
    /// Spin length of every site.
    pub spin: SpinSpec,
    /// Number of sites N ≥ 3.
    pub n_sites: usize,
    /// Coupling type.
    pub kind: Coupling,
    /// Field strength b.
    pub b: f64,
}

impl RingModel {
    /// Validated ring model.
    pub fn new(spin: SpinSpec, n_sites: usize, kind: Coupling, b: f64) -> Result<Self> {
        if n_sites < 3 {
            return Err(invalid("a ring needs at least 3 sites"));
        }
        if !b.is_finite() {
            return Err(Error::NonFinite("field".into()));
        }
        let m = Self { spin, n_sites, kind, b };
        let dim = m.dim_checked().ok_or(Error::TooLarge { dim: usize::MAX, limit: MAX_DIM })?;
        if dim > MAX_DIM {
            return Err(Error::TooLarge { dim, limit: MAX_DIM });
        }
        Ok(m)
    }

    /// Same ring with a different field.
    pub fn with_field(&self, b: f64) -> Result<Self> {
        Self::new(self.spin, self.n_sites, self.kind, b)
    }

    fn dim_checked(&self) -> Option<usize> {
        (0..self.n_sites).try_fold(1usize, |acc, _| acc.checked_mul(self.spin.dim()))
    }

    /// Hilbert-space dimension (2S+1)^N.
    pub fn dim(&self) -> usize {
        self.spin.dim().pow(self.n_sites as u32)
    }

    /// Composite layout of the ring.
    pub fn layout(&self) -> SiteLayout {
        SiteLayout::uniform(self.spin.dim(), self.n_sites).expect("validated ring")
    }
}

/// Sparse Hamiltonian of the ring.
pub fn hamiltonian(m: &RingModel) -> Result<SparseComplexMatrix> {
    let layout = m.layout();
    let n = m.n_sites;
    let s = m.spin;
    let (field_op, pairs): (SparseComplexMatrix, Vec<SparseComplexMatrix>) = match m.kind {
        Coupling::Ising => (sx(s), alloc::vec![sz(s)]),
        Coupling::Xy => (sz(s), alloc::vec![sx(s), sy(s)]),
        Coupling::Heisenberg => (sz(s), alloc::vec![sx(s), sy(s), sz(s)]),
    };
    let mut terms: Vec<SparseComplexMatrix> = Vec::new();
    let mut weights: Vec<C64> = Vec::new();
    for k in 0..n {
        terms.push(embed(&layout, k, &field_op)?);
        weights.push(re(-m.b / 2.0));
        for op in &pairs {
            terms.push(embed_product(&layout, &[(k, op), ((k + 1) % n, op)])?);
            weights.push(re(-1.0));
        }
    }
    let refs: Vec<(C64, &SparseComplexMatrix)> = weights.iter().copied().zip(terms.iter()).collect();
    let h = SparseComplexMatrix::lin_comb(&refs)?;
    // Sy⊗Sy has imaginary factors that cancel; drop their round-off.
    if h.hermitian_deviation() > 0.0 {
        let herm = h.add(&h.adjoint())?.scale_real(0.5);
        return Ok(herm);
    }
    Ok(h)
}

/// Permutation matrix that moves the state of site k to site k+1 (mod N).
pub fn cyclic_shift(spin: SpinSpec, n_sites: usize) -> Result<SparseComplexMatrix> {
    let d = spin.dim();
    let dim = d.checked_pow(n_sites as u32).ok_or_else(|| invalid("ring too large"))?;
    let mut entries = Vec::with_capacity(dim);
    let mut digits = alloc::vec![0usize; n_sites];
    for idx in 0..dim {
        let mut r = idx;
        for k in (0..n_sites).rev() {
            digits[k] = r % d;
            r /= d;
        }
        // New digit at site k+1 is the old digit at site k.
        let mut target = 0usize;
        for k in 0..n_sites {
            target = target * d + digits[(k + n_sites - 1) % n_sites];
        }
        entries.push((target, idx, re(1.0)));
    }
    SparseComplexMatrix::from_triplets(dim, dim, entries)
}

/// Product states that are exact ground states in the limiting cases.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticStates {
    /// All spins up along z.
    pub gs0up: StateVector,
    /// All spins down along z.
    pub gs0dn: StateVector,
    /// Ground state for b → +∞.
    pub gsplusinf: StateVector,
    /// Ground state for b → −∞.
    pub gsminusinf: StateVector,
}

/// Asymptotic ground states of the ring.
///
/// For the Ising coupling the b → ±∞ states point along ±x. For the XY
/// and Heisenberg couplings the field is along z, so b → ±∞ gives all
/// spins along ±z.
pub fn asymptotic_states(m: &RingModel) -> Result<AsymptoticStates> {
    let s = m.spin;
    let n = m.n_sites;
    let power = |v: StateVector| -> Result<StateVector> {
        let refs: Vec<&StateVector> = (0..n).map(|_| &v).collect();
        product_state(&refs)
    };
    let gs0up = power(zup(s))?;
    let gs0dn = power(zdn(s))?;
    let (plus, minus) = match m.kind {
        Coupling::Ising => (power(xup(s))?, power(xdn(s))?),
        Coupling::Xy | Coupling::Heisenberg => (gs0up.clone(), gs0dn.clone()),
    };
    Ok(AsymptoticStates { gs0up, gs0dn, gsplusinf: plus, gsminusinf: minus })
}

/// Ground-state observables at one field value.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    /// Field b.
    pub b: f64,
    /// Lowest energy E₀.
    pub e0: f64,
    /// Second-lowest energy E₁ (equal to E₀ for a degenerate ground state).
    pub e1: f64,
    /// E₁ − E₀.
    pub gap: f64,
    /// |⟨ψ_b|ψ₋∞⟩|².
    pub overlap_minus_inf: f64,
    /// |⟨ψ_b|ψ₊∞⟩|².
    pub overlap_plus_inf: f64,
    /// |⟨ψ_b|(ψ₀↑ + ψ₀↓)/√2⟩|².
    pub overlap_cat_plus: f64,
    /// |⟨ψ_b|(ψ₀↑ − ψ₀↓)/√2⟩|².
    pub overlap_cat_minus: f64,
    /// |⟨ψ_b|ψ₀↑⟩|² + |⟨ψ_b|ψ₀↓⟩|², insensitive to how a quasi-degenerate
    /// ground manifold is resolved.
    pub overlap_cat_sum: f64,
    /// ⟨Sx⁽ᵏ⁾⟩ for every site.
    pub mx: Vec<f64>,
    /// ⟨Sy⁽ᵏ⁾⟩ for every site.
    pub my: Vec<f64>,
    /// ⟨Sz⁽ᵏ⁾⟩ for every site.
    pub mz: Vec<f64>,
    /// C_δ = ⟨S⁽⁰⁾·S⁽ᵟ⁾⟩ − ⟨S⁽⁰⁾⟩·⟨S⁽ᵟ⁾⟩ for δ = 1..=N/2.
    pub correlations: Vec<f64>,
    /// Entanglement entropy (bits) of the last site with the rest.
    pub entropy: f64,
}

/// Applies a single-site operator to a state of `n_sites` sites of
/// dimension `d`.
fn apply_local(op: &SparseComplexMatrix, d: usize, n_sites: usize, site: usize, psi: &[C64]) -> Vec<C64> {
    let right = d.pow((n_sites - site - 1) as u32);
    let left = psi.len() / (d * right);
    let mut out = alloc::vec![C64::new(0.0, 0.0); psi.len()];
    for (r, c, v) in op.iter() {
        for l in 0..left {
            let src = (l * d + c) * right;
            let dst = (l * d + r) * right;
            for x in 0..right {
                out[dst + x] += v * psi[src + x];
            }
        }
    }
    out
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Chooses the reported ground state.
///
/// Eigenvectors within [`GROUND_MANIFOLD_WINDOW`] of E₀ form the ground
/// manifold. If it is more than one-dimensional, the state
/// (ψ₀↑ + ψ₀↓)/√2 projected onto the manifold is used (or the − combination
/// if its projection is larger), which selects the symmetric cat state at
/// b = 0 instead of an arbitrary mixture.
pub fn select_ground_state(ground: &EigenResult, asym: &AsymptoticStates) -> Result<StateVector> {
    let first = ground.eigenvectors.first().ok_or_else(|| invalid("empty eigen result"))?;
    let e0 = ground.eigenvalues[0];
    let manifold: Vec<&StateVector> = ground
        .eigenvalues
        .iter()
        .zip(&ground.eigenvectors)
        .filter(|(e, _)| **e - e0 < GROUND_MANIFOLD_WINDOW)
        .map(|(_, v)| v)
        .collect();
    if manifold.len() < 2 {
        return Ok(first.clone());
    }
    let r = FRAC_1_SQRT_2;
    let cat = |sign: f64| -> Vec<C64> {
        asym.gs0up.iter().zip(asym.gs0dn.iter()).map(|(u, d)| (u + d * sign) * r).collect()
    };
    let project = |c: &[C64]| -> StateVector {
        let mut p = StateVector::zeros(c.len());
        for v in &manifold {
            let w = dot(v, c);
            for (x, y) in p.iter_mut().zip(v.iter()) {
                *x += w * y;
            }
        }
        p
    };
    let plus = project(&cat(1.0));
    let minus = project(&cat(-1.0));
    let best = if minus.norm() > plus.norm() { minus } else { plus };
    if best.norm() < 1e-6 {
        return Ok(first.clone());
    }
    best.normalized()
}

/// Ground-state observables for a model and its computed low spectrum.
pub fn observables(m: &RingModel, ground: &EigenResult) -> Result<Observables> {
    let asym = asymptotic_states(m)?;
    let psi = select_ground_state(ground, &asym)?;
    let d = m.spin.dim();
    let n = m.n_sites;
    let ovl = |v: &StateVector| psi.overlap_sqr(v);
    let r = FRAC_1_SQRT_2;
    let cat = |sign: f64| -> StateVector {
        StateVector::new(asym.gs0up.iter().zip(asym.gs0dn.iter()).map(|(u, dn)| (u + dn * sign) * r).collect())
    };
    let ops = [sx(m.spin), sy(m.spin), sz(m.spin)];
    let mut mag = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    // S_a⁽ᵏ⁾ψ for every site and component.
    let mut images: Vec<[Vec<C64>; 3]> = Vec::with_capacity(n);
    for k in 0..n {
        let img = [0, 1, 2].map(|a| apply_local(&ops[a], d, n, k, &psi));
        for a in 0..3 {
            mag[a].push(dot(&psi, &img[a]).re);
        }
        images.push(img);
    }
    let correlations = (1..=n / 2)
        .map(|delta| {
            (0..3)
                .map(|a| dot(&images[0][a], &images[delta][a]).re - mag[a][0] * mag[a][delta])
                .sum::<f64>()
        })
        .collect();
    let rho = reduced_density_last_site(&psi, &m.layout())?;
    let [mx, my, mz] = mag;
    let e0 = ground.eigenvalues[0];
    let e1 = *ground.eigenvalues.get(1).unwrap_or(&e0);
    Ok(Observables {
        b: m.b,
        e0,
        e1,
        gap: e1 - e0,
        overlap_minus_inf: ovl(&asym.gsminusinf),
        overlap_plus_inf: ovl(&asym.gsplusinf),
        overlap_cat_plus: ovl(&cat(1.0)),
        overlap_cat_minus: ovl(&cat(-1.0)),
        overlap_cat_sum: ovl(&asym.gs0up) + ovl(&asym.gs0dn),
        mx,
        my,
        mz,
        correlations,
        entropy: entanglement_entropy(&rho),
    })
}

type CacheKey = (Coupling, u32, usize, i64, usize);

/// Lowest eigenpairs of ring Hamiltonians, remembered per
/// (coupling, S, N, b rounded to 1e-12, number of states).
///
/// The cache takes `&mut self`, so a solver has a single writer; parallel
/// sweeps use one solver per worker.
#[derive(Clone, Debug, Default)]
pub struct IsingSolver {
    /// Options passed to the Lanczos solver.
    pub options: EigsOptions,
    cache: BTreeMap<CacheKey, EigenResult>,
}

impl IsingSolver {
    /// Solver with the given eigensolver options.
    pub fn new(options: EigsOptions) -> Self {
        Self { options, cache: BTreeMap::new() }
    }

    /// Number of remembered results.
    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Lowest `m_states` eigenpairs of `model`.
    pub fn ground(&mut self, model: &RingModel, m_states: usize) -> Result<EigenResult> {
        if m_states == 0 {
            return Err(invalid("at least one state must be requested"));
        }
        let m_states = m_states.min(model.dim());
        let key = (model.kind, model.spin.two_s, model.n_sites, round(model.b * 1e12) as i64, m_states);
        if let Some(r) = self.cache.get(&key) {
            return Ok(r.clone());
        }
        let h = hamiltonian(model)?;
        let r = eigs_smallest(&h, m_states, &self.options)?;
        self.cache.insert(key, r.clone());
        Ok(r)
    }

    /// Ground-state observables using `m_states` eigenpairs (at least
    /// [`SMALL_FIELD_STATES`] when |b| < [`SMALL_FIELD`]).
    pub fn observables(&mut self, model: &RingModel, m_states: usize) -> Result<Observables> {
        let m = if model.b.abs() < SMALL_FIELD { m_states.max(SMALL_FIELD_STATES) } else { m_states.max(2) };
        let g = self.ground(model, m)?;
        observables(model, &g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh_dense;

    fn ring(n: usize, b: f64) -> RingModel {
        RingModel::new(SpinSpec::half(), n, Coupling::Ising, b).unwrap()
    }

    #[test]
    fn three_site_zero_field_ground_energy() {
        let e = eigh_dense(&hamiltonian(&ring(3, 0.0)).unwrap()).unwrap();
        assert!((e.eigenvalues[0] + 0.75).abs() < 1e-12);
        assert!((e.eigenvalues[1] + 0.75).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            RingModel::new(SpinSpec::half(), 23, Coupling::Ising, 0.0),
            Err(Error::TooLarge { .. })
        ));
        assert!(RingModel::new(SpinSpec::half(), 2, Coupling::Ising, 0.0).is_err());
    }

    #[test]
    fn asymptotic_state_basics() {
        let a = asymptotic_states(&ring(4, 1.0)).unwrap();
        assert_eq!(a.gs0up, StateVector::basis(16, 0));
        assert_eq!(a.gs0up.inner(&a.gs0dn), re(0.0));
        assert!((a.gsplusinf.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn local_application_matches_embedding() {
        let m = RingModel::new(SpinSpec::new(2), 3, Coupling::Ising, 0.0).unwrap();
        let psi: Vec<C64> = (0..27).map(|k| C64::new(sin(k as f64), cos(k as f64 * 0.7))).collect();
        for site in 0..3 {
            let a = apply_local(&sy(m.spin), 3, 3, site, &psi);
            let b = embed(&m.layout(), site, &sy(m.spin)).unwrap().mul_vec(&psi).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-14));
        }
    }

    #[test]
    fn solver_remembers_results() {
        let mut s = IsingSolver::default();
        let m = ring(6, 1.3);
        let a = s.ground(&m, 2).unwrap();
        let b = s.ground(&m, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(s.cached(), 1);
    }
}
