//! Single-spin angular-momentum operators in the Dicke basis, rotations and
//! the spin-½ Zeeman Hamiltonian.
//!
//! A spin of length S lives in a (2S+1)-dimensional space with basis
//! |S,S⟩, |S,S−1⟩, …, |S,−S⟩ (decreasing M). Spins are specified by the
//! integer 2S so that half-integers are exact.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{expm_dense, re, SparseComplexMatrix, StateVector, C64};
use crate::math::*;

/// Physical constants in the units used by the atomic-physics modules:
/// energies in h·MHz, fields in gauss, times in µs.
pub mod constants {
    /// ⁸⁷Rb ground-state magnetic-dipole hyperfine constant A_hfs/h in MHz.
    pub const A_HFS: f64 = 3417.341305452145;
    /// Electron spin g-factor.
    pub const G_S: f64 = -2.0023193043622;
    /// Electron orbital g-factor.
    pub const G_L: f64 = -0.99999369;
    /// ⁸⁷Rb nuclear g-factor.
    pub const G_I: f64 = 0.0009951414;
    /// Bohr magneton divided by Planck's constant, in MHz/G.
    pub const MU_B: f64 = 1.3996255481168427;
    /// Free-electron g-factor at the precision used for the spin-½ model.
    pub const G_E: f64 = -2.00231930436;
    /// ħ in units of h, i.e. 1/(2π); with energies in MHz and times in µs
    /// this is the reduced Planck constant.
    pub const HBAR: f64 = 1.0 / (2.0 * core::f64::consts::PI);

    /// Reduced Planck constant in J·s.
    pub const HBAR_SI: f64 = 1.054571817e-34;
    /// Atomic mass unit in kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.66053906660e-27;
    /// Bohr radius in m.
    pub const BOHR_RADIUS: f64 = 52.9177210903e-12;
    /// Mass of ⁸⁷Rb in atomic mass units.
    pub const RB87_MASS_U: f64 = 86.909187;
    /// Mass of ⁸⁷Rb in kg.
    pub const RB87_MASS: f64 = RB87_MASS_U * ATOMIC_MASS_UNIT;
}

/// A spin of length S = `two_s`/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinSpec {
    /// Twice the spin length.
    pub two_s: u32,
}

impl SpinSpec {
    /// Spin with 2S = `two_s`.
    pub const fn new(two_s: u32) -> Self {
        Self { two_s }
    }

    /// Spin of length `s`, which must be a non-negative multiple of ½.
    pub fn from_s(s: f64) -> Result<Self> {
        let two = 2.0 * s;
        if !(two.is_finite() && two >= 0.0 && (two - round(two)).abs() < 1e-12 && two < 1e6) {
            return Err(invalid("spin length must be a non-negative multiple of 1/2"));
        }
        Ok(Self::new(round(two) as u32))
    }

    /// Spin ½.
    pub const fn half() -> Self {
        Self::new(1)
    }

    /// Hilbert-space dimension 2S+1.
    pub const fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// Spin length S.
    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    /// Projection quantum numbers in basis order: S, S−1, …, −S.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.s() - k as f64).collect()
    }
}

/// Raising operator S₊ with ⟨M+1|S₊|M⟩ = √(S(S+1) − M(M+1)).
pub fn splus(s: SpinSpec) -> SparseComplexMatrix {
    let n = s.dim();
    let ss = s.s() * (s.s() + 1.0);
    // Basis index k holds M = S − k; S₊ maps index k+1 to index k.
    let entries = (0..n.saturating_sub(1)).map(|k| {
        let m = s.s() - (k + 1) as f64;
        (k, k + 1, re(sqrt(ss - m * (m + 1.0))))
    });
    SparseComplexMatrix::from_triplets(n, n, entries).expect("ladder entries are in bounds")
}

/// Lowering operator S₋ = S₊†.
pub fn sminus(s: SpinSpec) -> SparseComplexMatrix {
    splus(s).adjoint()
}

/// Sx = (S₊ + S₋)/2.
pub fn sx(s: SpinSpec) -> SparseComplexMatrix {
    splus(s).add(&sminus(s)).expect("same shape").scale_real(0.5)
}

/// Sy = (S₊ − S₋)/(2i).
pub fn sy(s: SpinSpec) -> SparseComplexMatrix {
    splus(s).sub(&sminus(s)).expect("same shape").scale(C64::new(0.0, -0.5))
}

/// Sz = diag(S, S−1, …, −S).
pub fn sz(s: SpinSpec) -> SparseComplexMatrix {
    SparseComplexMatrix::from_real_diagonal(&s.m_values())
}

/// Identity on the spin space.
pub fn sid(s: SpinSpec) -> SparseComplexMatrix {
    SparseComplexMatrix::identity(s.dim())
}

/// Rotation operator exp(−iα n·S) about the unit vector `axis`.
pub fn rotation(s: SpinSpec, axis: [f64; 3], alpha: f64) -> Result<SparseComplexMatrix> {
    let len = sqrt(axis.iter().map(|a| a * a).sum::<f64>());
    if !(len.is_finite() && (len - 1.0).abs() <= 1e-12) {
        return Err(invalid("rotation axis must be a unit vector"));
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("rotation angle".into()));
    }
    let gen = SparseComplexMatrix::lin_comb(&[
        (re(axis[0]), &sx(s)),
        (re(axis[1]), &sy(s)),
        (re(axis[2]), &sz(s)),
    ])?;
    let u = expm_dense(&(gen.to_dense() * C64::new(0.0, -alpha)));
    let mut m = SparseComplexMatrix::from_dmatrix(&u);
    // Drop round-off-level entries so exact zeros stay structural.
    let tiny = 1e-15;
    m = SparseComplexMatrix::from_triplets(
        m.nrows(),
        m.ncols(),
        m.iter().filter(|(_, _, v)| v.norm() > tiny).collect::<Vec<_>>(),
    )?;
    Ok(m)
}

/// A static magnetic field in units of the chosen field unit B₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldVector {
    /// x component.
    pub bx: f64,
    /// y component.
    pub by: f64,
    /// z component.
    pub bz: f64,
}

impl FieldVector {
    /// Field with the given components.
    pub const fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self { bx, by, bz }
    }

    /// Euclidean magnitude ‖B‖.
    pub fn magnitude(&self) -> f64 {
        sqrt(self.bx * self.bx + self.by * self.by + self.bz * self.bz)
    }

    /// True when all components are finite.
    pub fn is_finite(&self) -> bool {
        self.bx.is_finite() && self.by.is_finite() && self.bz.is_finite()
    }
}

/// Dimensionless prefactor k = μB·B₀/E₀ for a field unit of `b0_gauss`
/// gauss and an energy unit of h × `e0_mhz` MHz.
pub fn zeeman_prefactor(b0_gauss: f64, e0_mhz: f64) -> f64 {
    constants::MU_B * b0_gauss / e0_mhz
}

/// Spin-½ Zeeman Hamiltonian k·(−gₑ)·(Sx·Bx + Sy·By + Sz·Bz) in units of E₀.
///
/// Its eigenvalues are ±(k·(−gₑ)/2)·‖B‖.
pub fn zeeman_hamiltonian(field: FieldVector, k: f64, ge: f64) -> Result<SparseComplexMatrix> {
    if !(field.is_finite() && k.is_finite() && ge.is_finite()) {
        return Err(Error::NonFinite("Zeeman parameters".into()));
    }
    let s = SpinSpec::half();
    let c = k * (-ge);
    SparseComplexMatrix::lin_comb(&[
        (re(c * field.bx), &sx(s)),
        (re(c * field.by), &sy(s)),
        (re(c * field.bz), &sz(s)),
    ])
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The Sx = +S eigenstate: Dicke amplitudes 2^(−S)·√C(2S, M+S).
pub fn xup(s: SpinSpec) -> StateVector {
    let scale = pow(2.0, -s.s());
    StateVector::new((0..=s.two_s).map(|k| re(scale * sqrt(binomial(s.two_s, s.two_s - k)))).collect())
}

/// The Sx = −S eigenstate: amplitudes (−1)^(M+S)·2^(−S)·√C(2S, M+S).
pub fn xdn(s: SpinSpec) -> StateVector {
    let scale = pow(2.0, -s.s());
    StateVector::new(
        (0..=s.two_s)
            .map(|k| {
                // Basis index k holds M + S = 2S − k.
                let m_plus_s = s.two_s - k;
                let sign = if m_plus_s % 2 == 0 { 1.0 } else { -1.0 };
                re(sign * scale * sqrt(binomial(s.two_s, m_plus_s)))
            })
            .collect(),
    )
}

/// The Sz = +S eigenstate (first basis vector).
pub fn zup(s: SpinSpec) -> StateVector {
    StateVector::basis(s.dim(), 0)
}

/// The Sz = −S eigenstate (last basis vector).
pub fn zdn(s: SpinSpec) -> StateVector {
    StateVector::basis(s.dim(), s.dim() - 1)
}
