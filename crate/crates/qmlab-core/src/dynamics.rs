//! Split-step (Trotter) propagation on box grids in real and imaginary time,
//! for the linear Schrödinger equation and the Gross–Pitaevskii equation,
//! in one and three dimensions.
//!
//! States are coefficient vectors in the finite-resolution position basis.
//! One step of length δ applies e^{λ/2·H_pot} e^{λ·H_kin} e^{λ/2·H_pot}
//! with λ = −iδ (real time) or λ = −δ (imaginary time). The potential part
//! is diagonal on the grid, W_j + g_eff|v_j|², and the kinetic part is
//! diagonal in the momentum basis, reached by a DST-I along every axis.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::grid1d::{Dst1Plan, Grid1D};
use crate::linalg::{StateVector, C64};
use crate::math::*;
use crate::spin::constants::{BOHR_RADIUS, HBAR_SI, RB87_MASS};

/// Trap and atom parameters in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapParams {
    /// Atomic mass (kg).
    pub mass: f64,
    /// Edge length a of the cubic box (m).
    pub box_length: f64,
    /// Angular trap frequencies ω_x, ω_y, ω_z (rad/s).
    pub omega: [f64; 3],
    /// s-wave scattering length a_s (m).
    pub scattering_length: f64,
    /// Atom number N.
    pub n_atoms: f64,
}

impl TrapParams {
    /// ⁸⁷Rb in |F=1, M_F=1⟩ (a_s = 100.4 a₀) in a 10 µm box with trap
    /// frequencies 2π × {115, 540, 540} Hz.
    pub fn rb87(n_atoms: f64) -> Self {
        let w = 2.0 * PI;
        Self {
            mass: RB87_MASS,
            box_length: 10e-6,
            omega: [w * 115.0, w * 540.0, w * 540.0],
            scattering_length: 100.4 * BOHR_RADIUS,
            n_atoms,
        }
    }
}

/// Cubic 3D grid with dimensionless trap and interaction parameters.
///
/// Coordinates are x̃ = x/a ∈ (−½, ½), energies are in units of
/// E₁ = π²ħ²/(2ma²), Ω_u = mω_u a²/(πħ) and γ = 8a_s/(πa).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3D {
    /// Points per axis.
    pub n_max: usize,
    /// Dimensionless trap frequencies Ω_x, Ω_y, Ω_z.
    pub omega: [f64; 3],
    /// Dimensionless scattering length γ.
    pub gamma: f64,
    /// Atom number N.
    pub n_atoms: f64,
}

impl Grid3D {
    /// Grid from dimensionless parameters.
    pub fn new(n_max: usize, omega: [f64; 3], gamma: f64, n_atoms: f64) -> Result<Self> {
        if n_max < 2 {
            return Err(invalid("a 3D grid needs n_max >= 2"));
        }
        if omega.iter().any(|o| !(*o >= 0.0) || !o.is_finite()) || !gamma.is_finite() || !(n_atoms >= 1.0) {
            return Err(invalid("trap frequencies must be >= 0, gamma finite and N >= 1"));
        }
        Ok(Self { n_max, omega, gamma, n_atoms })
    }

    /// Grid from SI trap parameters.
    pub fn from_trap(n_max: usize, p: &TrapParams) -> Result<Self> {
        let a2 = p.box_length * p.box_length;
        let omega = p.omega.map(|w| p.mass * w * a2 / (PI * HBAR_SI));
        let gamma = 8.0 * p.scattering_length / (PI * p.box_length);
        Self::new(n_max, omega, gamma, p.n_atoms)
    }

    /// Centered coordinate x̃_j = j/(n_max+1) − ½ for j = 1..=n_max.
    pub fn coordinate(&self, j: usize) -> f64 {
        j as f64 / (self.n_max as f64 + 1.0) - 0.5
    }

    /// All centered coordinates.
    pub fn coordinates(&self) -> Vec<f64> {
        (1..=self.n_max).map(|j| self.coordinate(j)).collect()
    }

    /// Grid spacing 1/(n_max+1).
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_max as f64 + 1.0)
    }

    /// Total number of grid points n_max³.
    pub fn len(&self) -> usize {
        self.n_max * self.n_max * self.n_max
    }

    /// Always false: the grid has at least 8 points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Harmonic potential Ω_x²x̃² + Ω_y²ỹ² + Ω_z²z̃² at every grid point,
    /// x slowest.
    pub fn potential(&self) -> Vec<f64> {
        let c = self.coordinates();
        let [ox, oy, oz] = self.omega.map(|o| o * o);
        let mut w = Vec::with_capacity(self.len());
        for x in &c {
            for y in &c {
                for z in &c {
                    w.push(ox * x * x + oy * y * y + oz * z * z);
                }
            }
        }
        w
    }

    /// Ground-state widths √(⟨ũ²⟩) of the non-interacting harmonic
    /// oscillator, σ_u = √(ħ/(2mω_u))/a = 1/√(2πΩ_u).
    pub fn harmonic_widths(&self) -> [f64; 3] {
        self.omega.map(|o| 1.0 / sqrt(2.0 * PI * o))
    }
}

/// Everything needed to apply split-step factors on a grid: momentum-space
/// kinetic energies, grid potential and effective non-linear coefficient.
#[derive(Clone, Debug)]
pub struct SplitStepPlan {
    n_max: usize,
    dims: usize,
    kinetic: Vec<f64>,
    wval: Vec<f64>,
    g_eff: f64,
    dst: Dst1Plan,
}

impl SplitStepPlan {
    /// 1D plan: grid potential samples `wval` and non-linearity g of
    /// g|ψ(x)|², applied as g(n_max+1)|v_j|².
    pub fn new_1d(grid: &Grid1D, wval: Vec<f64>, g: f64) -> Result<Self> {
        let n = grid.n_max();
        if wval.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: wval.len() });
        }
        if wval.iter().any(|w| !w.is_finite()) || !g.is_finite() {
            return Err(Error::NonFinite("potential or non-linearity".into()));
        }
        let kinetic = (1..=n).map(|k| (k * k) as f64).collect();
        Ok(Self { n_max: n, dims: 1, kinetic, wval, g_eff: g * (n as f64 + 1.0), dst: Dst1Plan::new(n)? })
    }

    /// 3D Gross–Pitaevskii plan with non-linear term γ(N−1)(n_max+1)³|v|².
    pub fn new_3d(grid: &Grid3D) -> Result<Self> {
        let n = grid.n_max;
        let mut kinetic = Vec::with_capacity(grid.len());
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    kinetic.push((a * a + b * b + c * c) as f64);
                }
            }
        }
        let g_eff = grid.gamma * (grid.n_atoms - 1.0) * pow(n as f64 + 1.0, 3.0);
        Ok(Self { n_max: n, dims: 3, kinetic, wval: grid.potential(), g_eff, dst: Dst1Plan::new(n)? })
    }

    /// State dimension n_max^d.
    pub fn dim(&self) -> usize {
        self.kinetic.len()
    }

    /// Spatial dimension d (1 or 3).
    pub fn spatial_dims(&self) -> usize {
        self.dims
    }

    /// Points per axis.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Grid potential samples.
    pub fn potential(&self) -> &[f64] {
        &self.wval
    }

    /// Effective coefficient multiplying |v_j|² in the grid potential.
    pub fn nonlinearity(&self) -> f64 {
        self.g_eff
    }

    /// Position ↔ momentum transform (DST-I along every axis), in place.
    pub fn transform(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        let n = self.n_max;
        if self.dims == 1 {
            self.dst.apply_with_scratch(data, scratch);
            return;
        }
        let mut line = alloc::vec![C64::new(0.0, 0.0); n];
        // Strides of the x, y and z axes (x slowest).
        for stride in [1, n, n * n] {
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let start = base + off;
                    if stride == 1 {
                        self.dst.apply_with_scratch(&mut data[start..start + n], scratch);
                    } else {
                        for (k, l) in line.iter_mut().enumerate() {
                            *l = data[start + k * stride];
                        }
                        self.dst.apply_with_scratch(&mut line, scratch);
                        for (k, l) in line.iter().enumerate() {
                            data[start + k * stride] = *l;
                        }
                    }
                }
            }
        }
    }

    fn apply_potential(&self, v: &mut [C64], lambda: C64) {
        for (x, w) in v.iter_mut().zip(&self.wval) {
            let e = *w + self.g_eff * x.norm_sqr();
            *x *= (lambda * e).exp();
        }
    }

    fn apply_kinetic(&self, v: &mut [C64], lambda: C64, scratch: &mut Vec<C64>) {
        self.transform(v, scratch);
        for (x, k) in v.iter_mut().zip(&self.kinetic) {
            *x *= (lambda * *k).exp();
        }
        self.transform(v, scratch);
    }

    /// Kinetic energy Σ k²|u_k|² of a normalized state.
    pub fn kinetic_energy(&self, v: &[C64]) -> f64 {
        let mut u = v.to_vec();
        let mut scratch = Vec::new();
        self.transform(&mut u, &mut scratch);
        u.iter().zip(&self.kinetic).map(|(x, k)| k * x.norm_sqr()).sum()
    }

    /// Chemical potential μ = Σ k²|u_k|² + Σ_j (W_j + g_eff|v_j|²)|v_j|² of a
    /// normalized state.
    pub fn chemical_potential(&self, v: &[C64]) -> f64 {
        let pot: f64 = v
            .iter()
            .zip(&self.wval)
            .map(|(x, w)| {
                let p = x.norm_sqr();
                (w + self.g_eff * p) * p
            })
            .sum();
        self.kinetic_energy(v) + pot
    }

    fn check_state(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        if !psi.is_finite() {
            return Err(Error::NonFinite("initial state".into()));
        }
        if (psi.norm() - 1.0).abs() > 1e-8 {
            return Err(invalid("initial state must be normalized"));
        }
        Ok(())
    }
}

/// Real-time propagation over `dt` in `m ≥ 2` Trotter steps; returns the
/// final state.
pub fn propagate_real(plan: &SplitStepPlan, psi0: &StateVector, dt: f64, m: usize) -> Result<StateVector> {
    let mut out = None;
    propagate_impl(plan, psi0, dt, m, |s| out = Some(s.clone()))?;
    Ok(out.expect("at least one state is emitted"))
}

/// Real-time propagation returning (t, ψ(t)) at all M+1 times t = k·dt/M.
pub fn propagate_real_trajectory(
    plan: &SplitStepPlan,
    psi0: &StateVector,
    dt: f64,
    m: usize,
) -> Result<Vec<(f64, StateVector)>> {
    let mut traj = Vec::with_capacity(m + 1);
    traj.push((0.0, psi0.clone()));
    let mut k = 0usize;
    propagate_impl(plan, psi0, dt, m, |s| {
        k += 1;
        traj.push((dt * k as f64 / m as f64, s.clone()));
    })?;
    Ok(traj)
}

// Emits the state closed by a half potential step after each of the M
// Trotter steps; the last emission is the final state.
fn propagate_impl<F: FnMut(&StateVector)>(
    plan: &SplitStepPlan,
    psi0: &StateVector,
    dt: f64,
    m: usize,
    mut emit: F,
) -> Result<()> {
    if m < 2 {
        return Err(invalid("split-step propagation needs M >= 2 steps"));
    }
    if !dt.is_finite() {
        return Err(Error::NonFinite("time step".into()));
    }
    plan.check_state(psi0)?;
    let step = dt / m as f64;
    let half = C64::new(0.0, -0.5 * step);
    let full = C64::new(0.0, -step);
    let mut scratch = Vec::new();
    let mut v: Vec<C64> = psi0.to_vec();
    plan.apply_potential(&mut v, half);
    plan.apply_kinetic(&mut v, full, &mut scratch);
    for k in 1..=m {
        let mut closed = v.clone();
        plan.apply_potential(&mut closed, half);
        let closed = StateVector::new(closed);
        if !closed.is_finite() {
            return Err(Error::NonFinite("propagated state".into()));
        }
        emit(&closed);
        if k < m {
            plan.apply_potential(&mut v, full);
            plan.apply_kinetic(&mut v, full, &mut scratch);
        }
    }
    Ok(())
}

/// Starting state for imaginary-time propagation.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// Entries uniform in the complex square [−1, 1] + i[−1, 1], normalized.
    Random {
        /// RNG seed.
        seed: u64,
    },
    /// Real Gaussian of width σ (in box units) centered in the box.
    Gaussian {
        /// Width σ.
        sigma: f64,
    },
    /// A given state (normalized before use).
    Given(StateVector),
}

/// Options of [`ground_imag`].
#[derive(Clone, Debug, PartialEq)]
pub struct ImagTimeOptions {
    /// Stop when ‖ψ_{k+1} − ψ_k‖ < tolerance.
    pub tolerance: f64,
    /// Iteration limit.
    pub max_iter: usize,
    /// Starting state.
    pub initial: InitialState,
    /// Record μ after every iteration.
    pub record_mu: bool,
}

impl ImagTimeOptions {
    /// Defaults for 1D problems: tolerance 1e-10, random start with seed 0.
    pub fn one_d() -> Self {
        Self { tolerance: 1e-10, max_iter: 1_000_000, initial: InitialState::Random { seed: 0 }, record_mu: false }
    }

    /// Defaults for 3D problems: tolerance 1e-6, random start with seed 0.
    pub fn three_d() -> Self {
        Self { tolerance: 1e-6, ..Self::one_d() }
    }
}

/// Result of imaginary-time propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundState {
    /// Chemical potential μ (the energy for g = 0).
    pub mu: f64,
    /// Normalized ground state.
    pub gamma: StateVector,
    /// Number of full imaginary-time steps taken.
    pub iterations: usize,
    /// μ after every step, if requested.
    pub mu_history: Vec<f64>,
}

fn initial_vector(plan: &SplitStepPlan, init: &InitialState) -> Result<StateVector> {
    let n = plan.n_max;
    let v = match init {
        InitialState::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut u = || 2.0 * rng.random::<f64>() - 1.0;
            StateVector::new((0..plan.dim()).map(|_| C64::new(u(), u())).collect())
        }
        InitialState::Gaussian { sigma } => {
            if !(*sigma > 0.0) {
                return Err(invalid("Gaussian width must be positive"));
            }
            let c: Vec<f64> = (1..=n).map(|j| j as f64 / (n as f64 + 1.0) - 0.5).collect();
            let g: Vec<f64> = c.iter().map(|x| exp(-x * x / (4.0 * sigma * sigma))).collect();
            let vals: Vec<f64> = if plan.dims == 1 {
                g
            } else {
                let mut v = Vec::with_capacity(plan.dim());
                for a in &g {
                    for b in &g {
                        for d in &g {
                            v.push(a * b * d);
                        }
                    }
                }
                v
            };
            StateVector::from_real(&vals)
        }
        InitialState::Given(s) => {
            if s.dim() != plan.dim() {
                return Err(Error::DimensionMismatch { expected: plan.dim(), found: s.dim() });
            }
            s.clone()
        }
    };
    v.normalized()
}

fn normalize(v: &mut [C64]) -> Result<()> {
    let n = sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::NonFinite("imaginary-time state vanished or overflowed".into()));
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    Ok(())
}

/// Ground state by imaginary-time split-step propagation with step `db`,
/// renormalizing after every factor, iterated to a fixed point.
pub fn ground_imag(plan: &SplitStepPlan, db: f64, opts: &ImagTimeOptions) -> Result<GroundState> {
    if !(db > 0.0) || !db.is_finite() {
        return Err(invalid("imaginary time step must be positive"));
    }
    let half = C64::new(-0.5 * db, 0.0);
    let full = C64::new(-db, 0.0);
    let mut scratch = Vec::new();
    let mut p: Vec<C64> = initial_vector(plan, &opts.initial)?.to_vec();
    plan.apply_potential(&mut p, half);
    normalize(&mut p)?;
    plan.apply_kinetic(&mut p, full, &mut scratch);
    normalize(&mut p)?;
    let mut history = Vec::new();
    let mut iterations = 0usize;
    let mut diff = f64::INFINITY;
    while iterations < opts.max_iter {
        let mut next = p.clone();
        plan.apply_potential(&mut next, full);
        normalize(&mut next)?;
        plan.apply_kinetic(&mut next, full, &mut scratch);
        normalize(&mut next)?;
        iterations += 1;
        diff = sqrt(next.iter().zip(&p).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>());
        p = next;
        if opts.record_mu {
            history.push(plan.chemical_potential(&p));
        }
        if diff < opts.tolerance {
            break;
        }
    }
    if diff >= opts.tolerance {
        return Err(Error::NoConvergence { iterations, residual: diff });
    }
    plan.apply_potential(&mut p, half);
    normalize(&mut p)?;
    let mu = plan.chemical_potential(&p);
    Ok(GroundState { mu, gamma: StateVector::new(p), iterations, mu_history: history })
}

/// Position moments of a normalized 3D state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments3D {
    /// ⟨x̃⟩, ⟨ỹ⟩, ⟨z̃⟩.
    pub mean: [f64; 3],
    /// ⟨x̃²⟩, ⟨ỹ²⟩, ⟨z̃²⟩.
    pub mean_sq: [f64; 3],
    /// √(⟨ũ²⟩ − ⟨ũ⟩²) per axis.
    pub widths: [f64; 3],
}

/// First and second position moments of `gamma` on `grid`.
pub fn moments_3d(gamma: &StateVector, grid: &Grid3D) -> Result<Moments3D> {
    if gamma.dim() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: gamma.dim() });
    }
    let c = grid.coordinates();
    let n = grid.n_max;
    let mut mean = [0.0; 3];
    let mut mean_sq = [0.0; 3];
    for (idx, amp) in gamma.iter().enumerate() {
        let p = amp.norm_sqr();
        let pos = [c[idx / (n * n)], c[(idx / n) % n], c[idx % n]];
        for a in 0..3 {
            mean[a] += pos[a] * p;
            mean_sq[a] += pos[a] * pos[a] * p;
        }
    }
    let widths = [0, 1, 2].map(|a| sqrt((mean_sq[a] - mean[a] * mean[a]).max(0.0)));
    Ok(Moments3D { mean, mean_sq, widths })
}

/// Thomas–Fermi (kinetic energy neglected) solution of the 3D trap, in SI
/// units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThomasFermi {
    /// Central density ρ₀ (m⁻³), for a wavefunction normalized to 1.
    pub rho0: f64,
    /// Radii R_x, R_y, R_z (m).
    pub radii: [f64; 3],
    /// Chemical potential μ (J).
    pub mu: f64,
    /// ⟨u²⟩ = R_u²/7 (m²).
    pub mean_sq: [f64; 3],
}

/// Evaluates the Thomas–Fermi closed forms for an inverted-parabola
/// density ρ₀[1 − Σ(u/R_u)²].
pub fn thomas_fermi(p: &TrapParams) -> Result<ThomasFermi> {
    if !(p.n_atoms >= 2.0) || !(p.scattering_length > 0.0) {
        return Err(invalid("Thomas-Fermi limit needs N >= 2 and a_s > 0"));
    }
    let m = p.mass;
    let h = HBAR_SI;
    let a = p.scattering_length;
    let n1 = p.n_atoms - 1.0;
    let [wx, wy, wz] = p.omega;
    let w2 = wx * wx * wy * wy * wz * wz;
    let fifth = 0.2;
    let rho0 = pow(225.0 * pow(m, 6.0) * w2 / (pow(h, 6.0) * pow(a, 3.0) * pow(n1, 3.0)), fifth) / (8.0 * PI);
    let radius = |wu: f64, wv: f64, ww: f64| pow(15.0 * h * h * a * n1 * wv * ww / (m * m * pow(wu, 4.0)), fifth);
    let radii = [radius(wx, wy, wz), radius(wy, wz, wx), radius(wz, wx, wy)];
    let mu = 0.5 * pow(225.0 * m * pow(h, 4.0) * a * a * n1 * n1 * w2, fifth);
    Ok(ThomasFermi { rho0, radii, mu, mean_sq: radii.map(|r| r * r / 7.0) })
}
