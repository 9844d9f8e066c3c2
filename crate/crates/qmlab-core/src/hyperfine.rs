//! Ground-state hyperfine structure of ⁸⁷Rb in a magnetic field.
//!
//! The atom is modeled as a nuclear spin I = 3/2, an electron spin S = 1/2
//! and an orbital angular momentum L = 0, laid out as the composite space
//! [4, 2, 1]. Energies are in h·MHz, fields in gauss, times in µs and
//! angular frequencies in rad/µs, so ħ = 1/(2π).
//!
//! Eigenstates are identified by their low-field quantum numbers (F, M_F).
//! The labels are assigned at zero field from the expectation values of
//! F² and Fz and then carried to any other field by following the
//! state of maximal overlap in small field steps.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::composite::{embed, SiteLayout};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigh_dense, re, EigenResult, SparseComplexMatrix, StateVector, C64};
use crate::math::*;
use crate::spin::{constants, sx, sy, sz, SpinSpec};

/// A hyperfine level label (F, M_F).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    /// Total angular momentum quantum number F.
    pub f: i32,
    /// Projection M_F.
    pub m: i32,
}

impl Label {
    /// The label (f, m).
    pub const fn new(f: i32, m: i32) -> Self {
        Self { f, m }
    }
}

/// Canonical order of the eight ground-state levels. Indices into this
/// list are the "level numbers" used by [`LabeledLevels`] and
/// [`HyperfineModel::transition_matrix`].
pub const CANONICAL_LABELS: [Label; 8] = [
    Label::new(2, 2),
    Label::new(2, -2),
    Label::new(1, 0),
    Label::new(2, 0),
    Label::new(1, 1),
    Label::new(2, 1),
    Label::new(1, -1),
    Label::new(2, -1),
];

/// Position of `label` in [`CANONICAL_LABELS`].
pub fn canonical_index(label: Label) -> Result<usize> {
    CANONICAL_LABELS
        .iter()
        .position(|&l| l == label)
        .ok_or_else(|| invalid("no such hyperfine level"))
}

/// Largest field step used when following labels by overlap.
const TRACK_STEP: f64 = 0.5;
/// Relative size of the Fz term that lifts zero-field degeneracies.
const LABEL_SPLIT: f64 = 1e-6;

/// Hyperfine model with its angular-momentum operators.
#[derive(Clone, Debug)]
pub struct HyperfineModel {
    /// Hyperfine constant A_hfs/h in MHz.
    pub a: f64,
    /// Electron spin g-factor.
    pub g_s: f64,
    /// Electron orbital g-factor.
    pub g_l: f64,
    /// Nuclear g-factor.
    pub g_i: f64,
    /// Bohr magneton over h in MHz/G.
    pub mu_b: f64,
    /// Composite layout [2I+1, 2S+1, 2L+1].
    pub layout: SiteLayout,
    /// Nuclear spin operators (x, y, z).
    pub i: [SparseComplexMatrix; 3],
    /// Electron spin operators.
    pub s: [SparseComplexMatrix; 3],
    /// Orbital angular momentum operators.
    pub l: [SparseComplexMatrix; 3],
    /// J = S + L.
    pub j: [SparseComplexMatrix; 3],
    /// F = I + J.
    pub f: [SparseComplexMatrix; 3],
}

fn vector_op(layout: &SiteLayout, site: usize, spin: SpinSpec) -> [SparseComplexMatrix; 3] {
    let e = |m: SparseComplexMatrix| embed(layout, site, &m).expect("operator fits its slot");
    [e(sx(spin)), e(sy(spin)), e(sz(spin))]
}

fn sum3(a: &[SparseComplexMatrix; 3], b: &[SparseComplexMatrix; 3]) -> [SparseComplexMatrix; 3] {
    [0, 1, 2].map(|u| a[u].add(&b[u]).expect("same shape"))
}

/// Energies and eigenstates in canonical label order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledLevels {
    /// Field in gauss.
    pub bz: f64,
    /// `energies[k]` belongs to `CANONICAL_LABELS[k]`.
    pub energies: [f64; 8],
    /// `states[k]` belongs to `CANONICAL_LABELS[k]`.
    pub states: Vec<StateVector>,
    /// Smallest overlap |⟨old|new⟩|² met while following the labels.
    pub min_overlap: f64,
}

impl LabeledLevels {
    /// Energy of the level with the given label.
    pub fn energy(&self, label: Label) -> Result<f64> {
        Ok(self.energies[canonical_index(label)?])
    }
}

/// Location and value of an extremum of a transition energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagicField {
    /// Field of the extremum in gauss.
    pub bz: f64,
    /// E_i − E_j − 2A at the extremum, in MHz.
    pub gap: f64,
    /// True for a minimum, false for a maximum.
    pub is_minimum: bool,
}

impl HyperfineModel {
    /// ⁸⁷Rb with the bundled constants.
    pub fn rb87() -> Self {
        Self::new(constants::A_HFS, constants::G_S, constants::G_L, constants::G_I, constants::MU_B)
    }

    /// I = 3/2, J = 1/2 model with custom constants.
    pub fn new(a: f64, g_s: f64, g_l: f64, g_i: f64, mu_b: f64) -> Self {
        let layout = SiteLayout::new(alloc::vec![4, 2, 1]).expect("valid layout");
        let i = vector_op(&layout, 0, SpinSpec::new(3));
        let s = vector_op(&layout, 1, SpinSpec::new(1));
        let l = vector_op(&layout, 2, SpinSpec::new(0));
        let j = sum3(&s, &l);
        let f = sum3(&i, &j);
        Self { a, g_s, g_l, g_i, mu_b, layout, i, s, l, j, f }
    }

    /// F² = Fx² + Fy² + Fz².
    pub fn f_squared(&self) -> SparseComplexMatrix {
        let sq = |m: &SparseComplexMatrix| m.matmul(m).expect("square");
        sq(&self.f[0]).add(&sq(&self.f[1])).and_then(|x| x.add(&sq(&self.f[2]))).expect("same shape")
    }

    /// Magnetic moment operator −μB(gI·I_u + gS·S_u + gL·L_u) along axis `u`.
    fn moment(&self, u: usize) -> SparseComplexMatrix {
        SparseComplexMatrix::lin_comb(&[
            (re(-self.mu_b * self.g_i), &self.i[u]),
            (re(-self.mu_b * self.g_s), &self.s[u]),
            (re(-self.mu_b * self.g_l), &self.l[u]),
        ])
        .expect("same shape")
    }

    /// H₀ = A·I·J − μB·Bz·(gI·Iz + gS·Sz + gL·Lz).
    pub fn h0(&self, bz: f64) -> Result<SparseComplexMatrix> {
        if !bz.is_finite() {
            return Err(Error::NonFinite("field".into()));
        }
        let mut terms: Vec<(C64, SparseComplexMatrix)> = Vec::new();
        for u in 0..3 {
            terms.push((re(self.a), self.i[u].matmul(&self.j[u])?));
        }
        terms.push((re(bz), self.moment(2)));
        let refs: Vec<(C64, &SparseComplexMatrix)> = terms.iter().map(|(c, m)| (*c, m)).collect();
        SparseComplexMatrix::lin_comb(&refs)
    }

    /// Coupling H₁ = −μB Σ_u Bac_u (gS·S_u + gI·I_u + gL·L_u) to an
    /// oscillating field with complex amplitudes `bac`.
    pub fn h1(&self, bac: [C64; 3]) -> SparseComplexMatrix {
        let moments: Vec<SparseComplexMatrix> = (0..3).map(|u| self.moment(u)).collect();
        SparseComplexMatrix::lin_comb(&[(bac[0], &moments[0]), (bac[1], &moments[1]), (bac[2], &moments[2])])
            .expect("same shape")
    }

    /// The eight eigenvalues (ascending) and eigenstates at field `bz`.
    pub fn levels(&self, bz: f64) -> Result<EigenResult> {
        eigh_dense(&self.h0(bz)?)
    }

    /// Eigenstates in canonical label order at `bz`.
    ///
    /// Labels are assigned at zero field and carried to `bz` in steps of at
    /// most 0.5 G by maximal overlap.
    pub fn labeled_levels(&self, bz: f64) -> Result<LabeledLevels> {
        if !bz.is_finite() {
            return Err(Error::NonFinite("field".into()));
        }
        let mut cur = self.initial_labels()?;
        let steps = ceil(bz.abs() / TRACK_STEP) as usize;
        for k in 1..=steps {
            cur = self.follow(&cur, bz * k as f64 / steps as f64)?;
        }
        Ok(cur)
    }

    /// Follows labeled levels along an increasing or decreasing list of
    /// fields, returning one entry per field.
    pub fn track(&self, fields: &[f64]) -> Result<Vec<LabeledLevels>> {
        let mut out: Vec<LabeledLevels> = Vec::with_capacity(fields.len());
        for &b in fields {
            let next = match out.last() {
                None => self.labeled_levels(b)?,
                Some(prev) => {
                    let span = b - prev.bz;
                    let steps = ceil(span.abs() / TRACK_STEP).max(1.0) as usize;
                    let mut cur = prev.clone();
                    cur.min_overlap = 1.0;
                    for k in 1..=steps {
                        cur = self.follow(&cur, prev.bz + span * k as f64 / steps as f64)?;
                    }
                    cur
                }
            };
            out.push(next);
        }
        Ok(out)
    }

    /// Zero-field eigenstates labeled by (F, M_F).
    ///
    /// At zero field the F multiplets are degenerate, so the states are
    /// taken from H₀ + η·Fz, which has the same eigenvectors (Fz commutes
    /// with H₀ for a field along z) but no degeneracy; the energies are the
    /// H₀ expectation values.
    fn initial_labels(&self) -> Result<LabeledLevels> {
        let h0 = self.h0(0.0)?;
        let split = h0.add(&self.f[2].scale_real(LABEL_SPLIT * self.a.abs().max(1.0)))?;
        let eig = eigh_dense(&split)?;
        let f2 = self.f_squared();
        let mut energies = [0.0; 8];
        let mut states: Vec<Option<StateVector>> = alloc::vec![None; 8];
        for v in eig.eigenvectors {
            let x = f2.expectation(&v)?.re;
            let m = self.f[2].expectation(&v)?.re;
            let f = round((-1.0 + sqrt(1.0 + 4.0 * x)) / 2.0) as i32;
            let label = Label::new(f, round(m) as i32);
            let k = canonical_index(label).map_err(|_| Error::SearchFailed("unrecognized level".into()))?;
            if states[k].is_some() {
                return Err(Error::SearchFailed("ambiguous level labels".into()));
            }
            energies[k] = h0.expectation(&v)?.re;
            states[k] = Some(v);
        }
        Ok(LabeledLevels {
            bz: 0.0,
            energies,
            states: states.into_iter().map(|s| s.expect("all eight labels assigned")).collect(),
            min_overlap: 1.0,
        })
    }

    /// One continuation step from `prev` to field `bz`.
    fn follow(&self, prev: &LabeledLevels, bz: f64) -> Result<LabeledLevels> {
        let eig = self.levels(bz)?;
        let mut energies = [0.0; 8];
        let mut states: Vec<StateVector> = Vec::with_capacity(8);
        let mut taken = [false; 8];
        let mut min_overlap = prev.min_overlap;
        for old in &prev.states {
            let (best, ov) = eig
                .eigenvectors
                .iter()
                .enumerate()
                .filter(|(k, _)| !taken[*k])
                .map(|(k, v)| (k, old.overlap_sqr(v)))
                .fold((usize::MAX, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            taken[best] = true;
            min_overlap = min_overlap.min(ov);
            energies[states.len()] = eig.eigenvalues[best];
            // Keep the phase continuous with the previous step.
            let mut v = eig.eigenvectors[best].clone();
            let c = old.inner(&v);
            if c.norm() > 0.0 {
                let phase = c.conj() / c.norm();
                v = v.scaled(phase);
            }
            states.push(v);
        }
        if min_overlap < 0.5 {
            return Err(Error::SearchFailed("level continuation lost track of a state".into()));
        }
        Ok(LabeledLevels { bz, energies, states, min_overlap })
    }

    /// E_i − E_j − 2A at field `bz`.
    pub fn transition_offset(&self, level_i: Label, level_j: Label, bz: f64) -> Result<f64> {
        let lv = self.labeled_levels(bz)?;
        Ok(lv.energy(level_i)? - lv.energy(level_j)? - 2.0 * self.a)
    }

    /// Field inside `bracket` where E_i − E_j is stationary.
    ///
    /// Golden-section search for an interior minimum or maximum of
    /// E_i − E_j − 2A until the bracket is narrower than 1e-6 G. A result on
    /// the bracket boundary means there is no interior extremum and is
    /// reported as [`Error::SearchFailed`].
    pub fn magic_field(&self, level_i: Label, level_j: Label, bracket: (f64, f64)) -> Result<MagicField> {
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("bracket must be a finite interval lo < hi"));
        }
        canonical_index(level_i)?;
        canonical_index(level_j)?;
        let f = |b: f64| self.transition_offset(level_i, level_j, b);
        let (bmin, fmin) = golden_section(lo, hi, 1e-6, |b| f(b))?;
        let (bmax, fmax) = golden_section(lo, hi, 1e-6, |b| f(b).map(|x| -x))?;
        let margin = 1e-4 * (hi - lo);
        let interior = |b: f64| b > lo + margin && b < hi - margin;
        match (interior(bmin), interior(bmax)) {
            (true, false) => Ok(MagicField { bz: bmin, gap: fmin, is_minimum: true }),
            (false, true) => Ok(MagicField { bz: bmax, gap: -fmax, is_minimum: false }),
            (true, true) => Err(Error::SearchFailed("bracket contains more than one extremum".into())),
            (false, false) => Err(Error::SearchFailed("no interior extremum in bracket".into())),
        }
    }

    /// Transition matrix T = V†·H₁·V in the eigenbasis of H₀(bz), rows and
    /// columns in canonical label order.
    pub fn transition_matrix(&self, bz: f64, bac: [C64; 3]) -> Result<DMatrix<C64>> {
        let lv = self.labeled_levels(bz)?;
        Ok(self.transition_matrix_in(&lv, bac))
    }

    fn transition_matrix_in(&self, lv: &LabeledLevels, bac: [C64; 3]) -> DMatrix<C64> {
        let h1 = self.h1(bac);
        let images: Vec<Vec<C64>> = lv.states.iter().map(|v| h1.mul_vec(v).expect("dimension 8")).collect();
        DMatrix::from_fn(8, 8, |i, j| lv.states[i].inner(&StateVector::new(images[j].clone())))
    }

    /// Interaction-picture equations of motion for a field Bz plus an
    /// oscillating field Bac·cos(ωt).
    pub fn driven_system(&self, bz: f64, bac: [C64; 3], omega: f64) -> Result<DrivenSystem> {
        let lv = self.labeled_levels(bz)?;
        let t = self.transition_matrix_in(&lv, bac);
        DrivenSystem::new(lv.energies.to_vec(), t, omega)
    }
}

fn golden_section<F>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let invphi = (sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Interaction-picture amplitudes ψᵢ of a multi-level system driven by
/// H₁·cos(ωt):
///
/// iħ ψ̇ᵢ = ½ Σⱼ ψⱼ Tᵢⱼ [e^{i((Eᵢ−Eⱼ)/ħ+ω)t} + e^{i((Eᵢ−Eⱼ)/ħ−ω)t}].
#[derive(Clone, Debug, PartialEq)]
pub struct DrivenSystem {
    /// Level energies Eᵢ in h·MHz.
    pub energies: Vec<f64>,
    /// Transition matrix Tᵢⱼ in h·MHz.
    pub t_matrix: DMatrix<C64>,
    /// Drive angular frequency in rad/µs.
    pub omega: f64,
}

impl DrivenSystem {
    /// Validates shapes and builds the system.
    pub fn new(energies: Vec<f64>, t_matrix: DMatrix<C64>, omega: f64) -> Result<Self> {
        let n = energies.len();
        if t_matrix.nrows() != n || t_matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: t_matrix.nrows() });
        }
        if !(omega.is_finite() && energies.iter().all(|e| e.is_finite())) {
            return Err(Error::NonFinite("drive parameters".into()));
        }
        Ok(Self { energies, t_matrix, omega })
    }

    /// Same system with all energies and the drive frequency multiplied by
    /// `factor`; the couplings are unchanged.
    pub fn with_reduced_frequencies(&self, factor: f64) -> Self {
        Self {
            energies: self.energies.iter().map(|e| e * factor).collect(),
            t_matrix: self.t_matrix.clone(),
            omega: self.omega * factor,
        }
    }

    /// dψ/dt at time `t`.
    pub fn rhs(&self, t: f64, psi: &[C64]) -> Vec<C64> {
        let hbar = constants::HBAR;
        let n = self.energies.len();
        let phase: Vec<C64> = self.energies.iter().map(|e| C64::new(0.0, e * t / hbar).exp()).collect();
        let drive = 2.0 * cos(self.omega * t);
        let pref = C64::new(0.0, -0.5 * drive / hbar);
        // e^{i(Eᵢ−Eⱼ)t/ħ} = phaseᵢ·conj(phaseⱼ).
        let weighted: Vec<C64> = (0..n).map(|j| psi[j] * phase[j].conj()).collect();
        (0..n)
            .map(|i| {
                let mut s = C64::new(0.0, 0.0);
                for (j, w) in weighted.iter().enumerate() {
                    s += self.t_matrix[(i, j)] * w;
                }
                pref * phase[i] * s
            })
            .collect()
    }
}

/// Two-level drive parameters for the rotating-wave approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RwaParams {
    /// Upper-level energy Eᵢ (h·MHz).
    pub ei: f64,
    /// Lower-level energy Eⱼ (h·MHz).
    pub ej: f64,
    /// Coupling Tᵢⱼ (h·MHz).
    pub tij: C64,
    /// Drive angular frequency ω (rad/µs).
    pub omega: f64,
}

impl RwaParams {
    /// Detuning Δ = ω − (Eᵢ − Eⱼ)/ħ.
    pub fn detuning(&self) -> f64 {
        self.omega - (self.ei - self.ej) / constants::HBAR
    }

    /// Generalized Rabi frequency Ω = √(|Tᵢⱼ|²/ħ² + Δ²).
    pub fn rabi(&self) -> f64 {
        let d = self.detuning();
        sqrt(self.tij.norm_sqr() / (constants::HBAR * constants::HBAR) + d * d)
    }

    /// Right-hand side of the two-level RWA equations
    /// iħψ̇ᵢ = ½ψⱼ e^{i((Eᵢ−Eⱼ)/ħ−ω)t} Tᵢⱼ, iħψ̇ⱼ = ½ψᵢ e^{−i((Eᵢ−Eⱼ)/ħ−ω)t} Tᵢⱼ*.
    pub fn rhs(&self, t: f64, psi: &[C64]) -> Vec<C64> {
        let hbar = constants::HBAR;
        let rot = C64::new(0.0, -self.detuning() * t).exp();
        let k = C64::new(0.0, -0.5 / hbar);
        alloc::vec![k * psi[1] * rot * self.tij, k * psi[0] * rot.conj() * self.tij.conj()]
    }
}

/// Closed-form RWA amplitudes (ψᵢ(t), ψⱼ(t)).
pub fn rwa_evolve(p: &RwaParams, psi_i0: C64, psi_j0: C64, t: f64) -> Result<(C64, C64)> {
    if !(p.ei.is_finite() && p.ej.is_finite() && p.omega.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("RWA parameters".into()));
    }
    let hbar = constants::HBAR;
    let d = p.detuning();
    let om = p.rabi();
    let (c, s) = (cos(om * t / 2.0), sin(om * t / 2.0));
    let iu = C64::new(0.0, 1.0);
    // Δ/Ω and T/(ħΩ) both vanish smoothly as Ω → 0; guard the 0/0 case.
    let (d_om, t_om) = if om > 0.0 { (d / om, p.tij / (hbar * om)) } else { (0.0, C64::new(0.0, 0.0)) };
    let pi = C64::new(0.0, -d * t / 2.0).exp() * (psi_i0 * c + iu * (psi_i0 * d_om - t_om * psi_j0) * s);
    let pj = C64::new(0.0, d * t / 2.0).exp() * (psi_j0 * c - iu * (psi_j0 * d_om + t_om.conj() * psi_i0) * s);
    Ok((pi, pj))
}

/// Dressed-state energies (E₊, E₋) = Eᵢ + nħω + ħ(Δ ± Ω)/2.
pub fn dressed_energies(p: &RwaParams, n_photons: u64) -> (f64, f64) {
    let hbar = constants::HBAR;
    let base = p.ei + n_photons as f64 * hbar * p.omega;
    let (d, om) = (p.detuning(), p.rabi());
    (base + hbar * (d + om) / 2.0, base + hbar * (d - om) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_free_spectrum() {
        let m = HyperfineModel::rb87();
        let e = m.levels(0.0).unwrap();
        for k in 0..3 {
            assert!((e.eigenvalues[k] + 1.25 * m.a).abs() < 1e-9 * m.a);
        }
        for k in 3..8 {
            assert!((e.eigenvalues[k] - 0.75 * m.a).abs() < 1e-9 * m.a);
        }
    }

    #[test]
    fn labels_at_low_field() {
        let m = HyperfineModel::rb87();
        let lv = m.labeled_levels(0.01).unwrap();
        for (k, l) in CANONICAL_LABELS.iter().enumerate() {
            let expect = if l.f == 1 { -1.25 * m.a } else { 0.75 * m.a };
            assert!((lv.energies[k] - expect).abs() < 0.1, "{l:?}");
        }
    }

    #[test]
    fn transition_matrix_selection_rule() {
        let m = HyperfineModel::rb87();
        let t = m.transition_matrix(3.22895, [re(0.001), re(0.0), re(0.0)]).unwrap();
        assert!(t[(0, 1)].norm() < 1e-15);
        assert!((&t - t.adjoint()).iter().all(|z| z.norm() < 1e-12));
        let z = m.transition_matrix(1.0, [re(0.0); 3]).unwrap();
        assert!(z.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn rwa_resonant_rabi() {
        let p = RwaParams { ei: 1.0, ej: 0.0, tij: C64::new(0.3, 0.4), omega: 1.0 / constants::HBAR };
        for t in [0.0, 0.3, 1.7, 4.0] {
            let (pi, pj) = rwa_evolve(&p, re(0.0), re(1.0), t).unwrap();
            let expect = sin(0.5 * t / (2.0 * constants::HBAR));
            assert!((pi.norm_sqr() - expect * expect).abs() < 1e-12);
            assert!((pi.norm_sqr() + pj.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dressed_resonant_splitting() {
        let p = RwaParams { ei: 5.0, ej: 2.0, tij: C64::new(0.0, 0.2), omega: 3.0 / constants::HBAR };
        let (ep, em) = dressed_energies(&p, 4);
        assert!((ep - em - 0.2).abs() < 1e-12);
    }
}
