//! Composite grid problems: two particles in a 1D box with a contact or
//! truncated-Coulomb interaction, and a spin-½ particle in a harmonic trap
//! with a spin-dependent force and a transverse field.
//!
//! Both use the finite-resolution position basis of [`crate::grid1d`] with
//! energies in units of the box ground-state energy.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::composite::{reduced_density_prefix, reduced_density_suffix, DensityMatrix, SiteLayout};
use crate::error::{invalid, Error, Result};
use crate::grid1d::{kinetic_position, Grid1D};
use crate::linalg::{eigs_smallest, kron, re, EigsOptions, SparseComplexMatrix, StateVector, C64};
use crate::math::*;
use crate::spin::{sx, sz, SpinSpec};

/// Largest grid for two-body problems (dimension n_max² ≤ 1600).
pub const TWO_BODY_MAX_N: usize = 40;

/// ∫ϑ_j⁴ dx for the position-basis function at the box center, used for all
/// j: (2(n_max+1) + 1/(n_max+1))/3.
pub fn contact_quartic(n_max: usize) -> f64 {
    let n1 = n_max as f64 + 1.0;
    (2.0 * n1 + 1.0 / n1) / 3.0
}

/// Contact interaction δ(x₁−x₂) on the two-particle grid: diagonal, nonzero
/// only at j₁ = j₂, with value [`contact_quartic`].
pub fn contact_interaction(grid: &Grid1D) -> SparseComplexMatrix {
    let n = grid.n_max();
    let v = re(contact_quartic(n));
    let entries: Vec<_> = (0..n).map(|j| (j * n + j, j * n + j, v)).collect();
    SparseComplexMatrix::from_triplets(n * n, n * n, entries).expect("indices are in range")
}

/// Coulomb potential s/|x| with the singularity replaced by s(3Δ²−x²)/(2Δ³)
/// for |x| < Δ.
pub fn truncated_coulomb(strength: f64, delta: f64, x: f64) -> f64 {
    let ax = x.abs();
    if ax >= delta {
        strength / ax
    } else {
        strength * (3.0 * delta * delta - x * x) / (2.0 * delta * delta * delta)
    }
}

/// Interaction between the two particles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interaction {
    /// g·δ(x₁ − x₂).
    Contact {
        /// Interaction strength g.
        g: f64,
    },
    /// Truncated Coulomb potential of the separation.
    TruncatedCoulomb {
        /// Prefactor Q₁Q₂/(4πε₀) in box units.
        strength: f64,
        /// Truncation radius Δ > 0.
        delta: f64,
    },
}

impl Interaction {
    /// Truncated Coulomb interaction with Δ = one grid spacing.
    pub fn coulomb(strength: f64, grid: &Grid1D) -> Self {
        Self::TruncatedCoulomb { strength, delta: grid.spacing() }
    }
}

/// Two particles on a 1D grid in the potential Ω·W(x).
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyModel {
    /// Single-particle grid.
    pub grid: Grid1D,
    /// Potential scale Ω.
    pub omega: f64,
    /// Single-particle potential W at the grid points.
    pub potential: Vec<f64>,
    /// Interaction.
    pub interaction: Interaction,
}

impl TwoBodyModel {
    /// Validated model with potential samples `potential`.
    pub fn new(grid: Grid1D, omega: f64, potential: Vec<f64>, interaction: Interaction) -> Result<Self> {
        if grid.n_max() > TWO_BODY_MAX_N {
            return Err(Error::TooLarge { dim: grid.n_max() * grid.n_max(), limit: TWO_BODY_MAX_N * TWO_BODY_MAX_N });
        }
        if potential.len() != grid.n_max() {
            return Err(Error::DimensionMismatch { expected: grid.n_max(), found: potential.len() });
        }
        if let Interaction::TruncatedCoulomb { delta, .. } = interaction {
            if !(delta > 0.0) {
                return Err(invalid("truncation radius must be positive"));
            }
        }
        Ok(Self { grid, omega, potential, interaction })
    }

    /// Two particles in the bare square well with a contact interaction.
    pub fn square_well_contact(n_max: usize, g: f64) -> Result<Self> {
        let grid = Grid1D::new(n_max)?;
        Self::new(grid, 0.0, alloc::vec![0.0; n_max], Interaction::Contact { g })
    }

    /// Hilbert-space dimension n_max².
    pub fn dim(&self) -> usize {
        self.grid.n_max() * self.grid.n_max()
    }

    /// H = H_kin⊗1 + 1⊗H_kin + Ω(W⊗1 + 1⊗W) + H_int, index j₁·n_max + j₂.
    pub fn hamiltonian(&self) -> Result<SparseComplexMatrix> {
        let n = self.grid.n_max();
        let id = SparseComplexMatrix::identity(n);
        let one = kinetic_position(&self.grid).add(&SparseComplexMatrix::from_real_diagonal(&self.potential).scale_real(self.omega))?;
        let single = kron(&[&one, &id])?.add(&kron(&[&id, &one])?)?;
        let int = match self.interaction {
            Interaction::Contact { g } => contact_interaction(&self.grid).scale_real(g),
            Interaction::TruncatedCoulomb { strength, delta } => {
                let x = self.grid.points();
                let mut d = Vec::with_capacity(n * n);
                for x1 in &x {
                    for x2 in &x {
                        d.push(truncated_coulomb(strength, delta, x1 - x2));
                    }
                }
                SparseComplexMatrix::from_real_diagonal(&d)
            }
        };
        single.add(&int)
    }
}

/// Swap of the two particles, |j₁, j₂⟩ ↦ |j₂, j₁⟩.
pub fn exchange_operator(n_max: usize) -> SparseComplexMatrix {
    let entries: Vec<_> = (0..n_max)
        .flat_map(|a| (0..n_max).map(move |b| (b * n_max + a, a * n_max + b, re(1.0))))
        .collect();
    SparseComplexMatrix::from_triplets(n_max * n_max, n_max * n_max, entries).expect("indices are in range")
}

/// Two-body ground state.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyGround {
    /// Ground energy.
    pub energy: f64,
    /// Ground state, index j₁·n_max + j₂.
    pub psi: StateVector,
    /// (n_max+1)|ψ_{j₁j₂}|² on an (n_max+2)² array whose first and last rows
    /// and columns are the zero boundary values.
    pub density2d: DMatrix<f64>,
    /// ⟨ψ|P₁₂|ψ⟩: +1 for a symmetric, −1 for an antisymmetric state.
    pub exchange_parity: f64,
}

impl TwoBodyGround {
    /// Σ_j ρ(x_j, x_j): weight of the density on the diagonal x₁ = x₂.
    pub fn diagonal_density(&self) -> f64 {
        let n = self.density2d.nrows();
        (1..n - 1).map(|j| self.density2d[(j, j)]).sum()
    }
}

/// Pads a two-particle density (n_max+1)|ψ|² with zero boundary rows and
/// columns.
pub fn density2d(psi: &[C64], n_max: usize) -> DMatrix<f64> {
    let scale = n_max as f64 + 1.0;
    DMatrix::from_fn(n_max + 2, n_max + 2, |r, c| {
        if r == 0 || c == 0 || r > n_max || c > n_max {
            0.0
        } else {
            scale * psi[(r - 1) * n_max + (c - 1)].norm_sqr()
        }
    })
}

/// Ground state of a two-body model by the sparse Lanczos solver.
pub fn two_body_ground(m: &TwoBodyModel, opts: &EigsOptions) -> Result<TwoBodyGround> {
    let h = m.hamiltonian()?;
    let r = eigs_smallest(&h, 1, opts)?;
    let psi = r.eigenvectors[0].clone();
    let n = m.grid.n_max();
    let swapped = exchange_operator(n).mul_vec(&psi)?;
    let parity = psi.iter().zip(&swapped).map(|(a, b)| (a.conj() * b).re).sum();
    Ok(TwoBodyGround { energy: r.eigenvalues[0], density2d: density2d(&psi, n), psi, exchange_parity: parity })
}

/// Mean and variance of the separation x₁ − x₂ in a normalized two-body
/// state.
pub fn interparticle_stats(psi: &StateVector, grid: &Grid1D) -> Result<(f64, f64)> {
    let n = grid.n_max();
    if psi.dim() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: psi.dim() });
    }
    let x = grid.points();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (idx, a) in psi.iter().enumerate() {
        let d = x[idx / n] - x[idx % n];
        let p = a.norm_sqr();
        m1 += d * p;
        m2 += d * d * p;
    }
    Ok((m1, m2 - m1 * m1))
}

/// Spin-½ particle on the grid x̃ ∈ (−½, ½) with
/// H = H_kin⊗1 + Ω²x̃²⊗1 − f x̃⊗S_z + b_x 1⊗S_x.
///
/// Basis ordering: position slow, spin fast, |j⟩⊗|↑⟩ before |j⟩⊗|↓⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinSpaceModel {
    /// Spatial grid.
    pub grid: Grid1D,
    /// Dimensionless trap frequency Ω = mωa²/(πħ).
    pub omega: f64,
    /// Dimensionless force f = F·2ma³/(π²ħ²).
    pub f: f64,
    /// Dimensionless transverse field b_x = B_x·2ma²/(π²ħ²).
    pub bx: f64,
}

impl SpinSpaceModel {
    /// Model on an n_max-point grid.
    pub fn new(n_max: usize, omega: f64, f: f64, bx: f64) -> Result<Self> {
        if ![omega, f, bx].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spin-space parameters".into()));
        }
        Ok(Self { grid: Grid1D::new(n_max)?, omega, f, bx })
    }

    /// Centered grid coordinates x̃_j = j/(n_max+1) − ½.
    pub fn coordinates(&self) -> Vec<f64> {
        self.grid.points().into_iter().map(|x| x - 0.5).collect()
    }

    /// Hilbert-space dimension 2·n_max.
    pub fn dim(&self) -> usize {
        2 * self.grid.n_max()
    }

    /// Sparse Hamiltonian.
    pub fn hamiltonian(&self) -> Result<SparseComplexMatrix> {
        let n = self.grid.n_max();
        let s = SpinSpec::half();
        let ids = SparseComplexMatrix::identity(2);
        let idx = SparseComplexMatrix::identity(n);
        let xs = self.coordinates();
        let x = SparseComplexMatrix::from_real_diagonal(&xs);
        let x2: Vec<f64> = xs.iter().map(|v| self.omega * self.omega * v * v).collect();
        let one = kinetic_position(&self.grid).add(&SparseComplexMatrix::from_real_diagonal(&x2))?;
        let h = kron(&[&one, &ids])?
            .sub(&kron(&[&x, &sz(s)])?.scale_real(self.f))?
            .add(&kron(&[&idx, &sx(s)])?.scale_real(self.bx))?;
        Ok(h)
    }
}

/// Ground state of the spin-space model with its standard analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSpaceGround {
    /// Ground energy E₀.
    pub energy: f64,
    /// First excited energy E₁.
    pub excited_energy: f64,
    /// Ground state, index 2j + s with s = 0 for ↑ and 1 for ↓.
    pub gamma: StateVector,
    /// Spin-up density matrix (n_max+1)·γ_{j↑}γ*_{j′↑} on the grid.
    pub rho_up: DMatrix<C64>,
    /// Spin-down density matrix (n_max+1)·γ_{j↓}γ*_{j′↓} on the grid.
    pub rho_down: DMatrix<C64>,
    /// Spatial reduced density matrix (spin traced out), unit trace.
    pub rho_space: DensityMatrix,
    /// Spin reduced density matrix (position traced out).
    pub rho_spin: DensityMatrix,
    /// ⟨σ_z(x̃_j)⟩ = (½ρ↑ − ½ρ↓)/(ρ↑ + ρ↓) at every grid point.
    pub spin_profile: Vec<f64>,
}

impl SpinSpaceGround {
    /// E₁ − E₀.
    pub fn gap(&self) -> f64 {
        self.excited_energy - self.energy
    }
}

/// Ground state and analysis of the spin-space model.
pub fn spinspace_ground(m: &SpinSpaceModel, opts: &EigsOptions) -> Result<SpinSpaceGround> {
    let h = m.hamiltonian()?;
    let r = eigs_smallest(&h, 2, opts)?;
    let gamma = r.eigenvectors[0].clone();
    let n = m.grid.n_max();
    let scale = n as f64 + 1.0;
    let block = |s: usize| DMatrix::from_fn(n, n, |a, b| gamma[2 * a + s] * gamma[2 * b + s].conj() * scale);
    let rho_up = block(0);
    let rho_down = block(1);
    let layout = SiteLayout::new(alloc::vec![n, 2])?;
    let rho_space = reduced_density_prefix(&gamma, &layout, 1)?;
    let rho_spin = reduced_density_suffix(&gamma, &layout, 1)?;
    let spin_profile = (0..n)
        .map(|j| {
            let up = gamma[2 * j].norm_sqr();
            let dn = gamma[2 * j + 1].norm_sqr();
            if up + dn > 0.0 {
                0.5 * (up - dn) / (up + dn)
            } else {
                0.0
            }
        })
        .collect();
    Ok(SpinSpaceGround {
        energy: r.eigenvalues[0],
        excited_energy: r.eigenvalues[1],
        gamma,
        rho_up,
        rho_down,
        rho_space,
        rho_spin,
        spin_profile,
    })
}

/// Two-level estimate of the ground-state splitting for small b_x:
/// ΔE = b_x·exp(−πf²/(16Ω³)), i.e. B_x·exp(−F²/(4mħω³)) in box units.
pub fn perturbative_gap(omega: f64, f: f64, bx: f64) -> f64 {
    bx * exp(-PI * f * f / (16.0 * omega * omega * omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contact_interaction_structure() {
        let g = Grid1D::new(10).unwrap();
        let h = contact_interaction(&g);
        assert_eq!(h.nnz(), 10);
        assert!((h.get(0, 0).re - (22.0 + 1.0 / 11.0) / 3.0).abs() < 1e-14);
        assert_eq!(h.get(1, 1), re(0.0));
    }

    #[test]
    fn coulomb_branches() {
        let (s, d) = (2.0, 0.1);
        assert!((truncated_coulomb(s, d, d) - s / d).abs() < 1e-12);
        assert!((truncated_coulomb(s, d, d * (1.0 - 1e-12)) - s / d).abs() < 1e-9);
        assert!((truncated_coulomb(s, d, 0.0) - 1.5 * s / d).abs() < 1e-12);
        assert_eq!(truncated_coulomb(s, d, -0.3), truncated_coulomb(s, d, 0.3));
    }

    #[test]
    fn perturbative_gap_limits() {
        assert_eq!(perturbative_gap(10.0, 0.0, 3.0), 3.0);
        let e1 = -log(perturbative_gap(10.0, 5.0, 1.0));
        let e2 = -log(perturbative_gap(10.0, 10.0, 1.0));
        assert!((e2 / e1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exchange_operator_is_involution() {
        let p = exchange_operator(4);
        let pp = p.matmul(&p).unwrap();
        assert!(pp.sub(&SparseComplexMatrix::identity(16)).unwrap().max_abs() < 1e-15);
    }
}
