//! A particle in a 1D box [0, 1]: momentum basis φₙ(x) = √2 sin(nπx),
//! the finite-resolution position basis on the grid xⱼ = j/(n_max+1),
//! the type-I discrete sine transform that connects them, and the
//! square well with a step in its bottom as an analytic benchmark.
//!
//! Energies are in units of the box ground-state energy, so the kinetic
//! energy of φₙ is n².

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::fft::FftPlan;
use crate::linalg::{eigh_dense, re, SparseComplexMatrix, C64};
use crate::math::*;
use crate::quad::GaussLegendre;

/// Largest n_max for which the DST-I is applied as an explicit matrix; longer
/// transforms go through an FFT.
pub const DST_MATRIX_MAX: usize = 64;

/// Uniform grid of n_max interior points of the unit box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid1D {
    n_max: usize,
}

impl Grid1D {
    /// Grid with `n_max ≥ 1` points.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("a grid needs at least one point"));
        }
        Ok(Self { n_max })
    }

    /// Number of grid points (and of momentum modes).
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Grid spacing 1/(n_max+1).
    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_max as f64 + 1.0)
    }

    /// Point x_j for j = 1..=n_max.
    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// All grid points in ascending order.
    pub fn points(&self) -> Vec<f64> {
        (1..=self.n_max).map(|j| self.point(j)).collect()
    }
}

/// X_{nj} = √(2/(n+1)) sin(πnj/(n+1)) for n, j = 1..=n.
pub fn dst_matrix(n: usize) -> DMatrix<f64> {
    let s = sqrt(2.0 / (n as f64 + 1.0));
    let w = PI / (n as f64 + 1.0);
    DMatrix::from_fn(n, n, |r, c| {
        // Reduce nj mod 2(n+1) so the sine argument stays small.
        let k = ((r + 1) * (c + 1)) % (2 * (n + 1));
        s * sin(w * k as f64)
    })
}

/// Precomputed orthonormal DST-I of a fixed length. The transform is
/// symmetric and its own inverse.
#[derive(Clone, Debug)]
pub struct Dst1Plan {
    n: usize,
    kind: DstKind,
}

#[derive(Clone, Debug)]
enum DstKind {
    Matrix(DMatrix<f64>),
    Fft(FftPlan),
}

impl Dst1Plan {
    /// Plan for vectors of length `n ≥ 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("DST length must be at least 1"));
        }
        let kind = if n <= DST_MATRIX_MAX { DstKind::Matrix(dst_matrix(n)) } else { DstKind::Fft(FftPlan::new(2 * (n + 1))) };
        Ok(Self { n, kind })
    }

    /// Transform length.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: a plan has length ≥ 1.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Transforms `data` in place, using `scratch` as work space.
    pub fn apply_with_scratch(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        assert_eq!(data.len(), self.n, "DST length mismatch");
        let n = self.n;
        match &self.kind {
            DstKind::Matrix(x) => {
                scratch.clear();
                scratch.extend_from_slice(data);
                for (r, out) in data.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, v) in scratch.iter().enumerate() {
                        acc += *v * x[(r, c)];
                    }
                    *out = acc;
                }
            }
            DstKind::Fft(plan) => {
                // Odd extension y = (0, v, 0, −reverse(v)); its DFT is
                // Y_k = −2i Σ_j v_j sin(πjk/(n+1)).
                let m = plan.len();
                scratch.clear();
                scratch.resize(m, C64::new(0.0, 0.0));
                for (j, v) in data.iter().enumerate() {
                    scratch[j + 1] = *v;
                    scratch[m - j - 1] = -*v;
                }
                plan.forward(scratch);
                let scale = sqrt(2.0 / (n as f64 + 1.0)) * 0.5;
                for (k, out) in data.iter_mut().enumerate() {
                    *out = scratch[k + 1] * C64::new(0.0, scale);
                }
            }
        }
    }

    /// Transforms `data` in place.
    pub fn apply_in_place(&self, data: &mut [C64]) {
        let mut scratch = Vec::new();
        self.apply_with_scratch(data, &mut scratch);
    }

    /// Transformed copy of `v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        self.apply_in_place(&mut out);
        out
    }
}

/// Orthonormal DST-I of `v` (its own inverse). Empty input gives empty
/// output.
pub fn dst1(v: &[C64]) -> Vec<C64> {
    match Dst1Plan::new(v.len()) {
        Ok(plan) => plan.apply(v),
        Err(_) => Vec::new(),
    }
}

/// Real-valued DST-I.
pub fn dst1_real(v: &[f64]) -> Vec<f64> {
    let c: Vec<C64> = v.iter().map(|x| re(*x)).collect();
    dst1(&c).into_iter().map(|z| z.re).collect()
}

/// Converts an operator between the momentum and position representations,
/// X·U·X (the map is its own inverse).
pub fn convert_operator(u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if !u.is_square() || u.nrows() == 0 {
        return Err(invalid("operator must be square and non-empty"));
    }
    let x = dst_matrix(u.nrows()).map(re);
    Ok(&x * u * &x)
}

/// Kinetic energy in the position basis: X·diag(1², …, n_max²)·X.
pub fn kinetic_position(g: &Grid1D) -> SparseComplexMatrix {
    let n = g.n_max();
    let x = dst_matrix(n);
    let mut xd = x.clone();
    for (c, mut col) in xd.column_iter_mut().enumerate() {
        col *= ((c + 1) * (c + 1)) as f64;
    }
    let k = &xd * &x;
    // Symmetrize round-off.
    let k = (&k + k.transpose()) * 0.5;
    SparseComplexMatrix::from_dmatrix(&k.map(re))
}

/// Kinetic energy in the momentum basis: diag(1², …, n_max²).
pub fn kinetic_momentum(g: &Grid1D) -> SparseComplexMatrix {
    let d: Vec<f64> = (1..=g.n_max()).map(|n| (n * n) as f64).collect();
    SparseComplexMatrix::from_real_diagonal(&d)
}

/// Samples W on the grid.
pub fn potential_samples<W: Fn(f64) -> f64>(g: &Grid1D, w: W) -> Result<Vec<f64>> {
    g.points()
        .into_iter()
        .map(|x| {
            let v = w(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(alloc::format!("potential at x = {x}")))
            }
        })
        .collect()
}

/// Potential energy in the position basis, diag(W(x₁), …, W(x_{n_max})).
pub fn potential_position<W: Fn(f64) -> f64>(g: &Grid1D, w: W) -> Result<SparseComplexMatrix> {
    Ok(SparseComplexMatrix::from_real_diagonal(&potential_samples(g, w)?))
}

/// Momentum eigenfunction φₙ(x) = √2 sin(nπx).
pub fn momentum_basis_function(n: usize, x: f64) -> f64 {
    sqrt(2.0) * sin(n as f64 * PI * x)
}

/// ψ(x) = Σₙ uₙ φₙ(x) for momentum coefficients u.
pub fn wavefunction_from_momentum(u: &[C64], x: f64) -> C64 {
    u.iter().enumerate().map(|(k, c)| c * momentum_basis_function(k + 1, x)).sum()
}

/// Density (n_max+1)|v_j|² at the grid points of a position-basis vector,
/// with the box walls (0, 0) and (1, 0) added.
pub fn interpolate_density(g: &Grid1D, v: &[C64]) -> Result<Vec<(f64, f64)>> {
    if v.len() != g.n_max() {
        return Err(Error::DimensionMismatch { expected: g.n_max(), found: v.len() });
    }
    let scale = g.n_max() as f64 + 1.0;
    let mut out = Vec::with_capacity(v.len() + 2);
    out.push((0.0, 0.0));
    out.extend(g.points().into_iter().zip(v).map(|(x, c)| (x, scale * c.norm_sqr())));
    out.push((1.0, 0.0));
    Ok(out)
}

/// Step in the bottom of the well: Ω for x < ½, 0 for x > ½ and Ω/2 at
/// x = ½ (which is a grid point only for odd n_max).
pub fn stepwell_potential(omega: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        if x < 0.5 {
            omega
        } else if x == 0.5 {
            omega / 2.0
        } else {
            0.0
        }
    }
}

/// ⟨n|W|n′⟩ of the step potential in the momentum basis.
pub fn stepwell_potential_me(omega: f64, n: usize, np: usize) -> f64 {
    assert!(n >= 1 && np >= 1, "momentum quantum numbers start at 1");
    if n == np {
        return omega / 2.0;
    }
    if (n + np) % 2 == 0 {
        return 0.0;
    }
    let (n, np) = (n as i64, np as i64);
    let sign = |e: i64| if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sum = n + np;
    let diff = n - np;
    omega / PI * (sign((sum + 1) / 2) / sum as f64 - sign((diff + 1).div_euclid(2)) / diff as f64)
}

/// Hamiltonian entry ⟨n|H|n′⟩ = n²δ_{nn′} + ⟨n|W|n′⟩ of the step well.
pub fn stepwell_momentum_me(omega: f64, n: usize, np: usize) -> f64 {
    let kin = if n == np { (n * n) as f64 } else { 0.0 };
    kin + stepwell_potential_me(omega, n, np)
}

/// Step-well Hamiltonian in the momentum basis.
pub fn stepwell_hamiltonian_momentum(omega: f64, n_max: usize) -> Result<SparseComplexMatrix> {
    let mut t = Vec::new();
    for n in 1..=n_max {
        for np in 1..=n_max {
            let v = stepwell_momentum_me(omega, n, np);
            if v != 0.0 {
                t.push((n - 1, np - 1, re(v)));
            }
        }
    }
    SparseComplexMatrix::from_triplets(n_max, n_max, t)
}

/// Step-well Hamiltonian in the position basis: kinetic energy converted
/// from the momentum basis plus the diagonal potential.
pub fn stepwell_hamiltonian_position(omega: f64, g: &Grid1D) -> Result<SparseComplexMatrix> {
    kinetic_position(g).add(&potential_position(g, stepwell_potential(omega))?)
}

/// Analytic ground state of the step well for 0 ≤ E ≤ Ω:
/// ψ = A sinh(k₁πx) for x ≤ ½ and B sin(k₂π(1−x)) for x ≥ ½.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepWellSolution {
    /// Step height Ω.
    pub omega: f64,
    /// Decay wavenumber under the step.
    pub k1: f64,
    /// Oscillation wavenumber beside the step.
    pub k2: f64,
    /// Amplitude of the sinh piece.
    pub a: f64,
    /// Amplitude of the sine piece.
    pub b: f64,
}

/// Smallest Ω with a ground state below the step.
pub const STEPWELL_THRESHOLD: f64 = 1.66809;

fn k_coth(k: f64) -> f64 {
    // k·coth(πk/2), continuous at k = 0 where it equals 2/π.
    if k.abs() < 1e-8 {
        2.0 / PI
    } else {
        k / tanh(PI * k / 2.0)
    }
}

impl StepWellSolution {
    /// ψ(x).
    pub fn psi(&self, x: f64) -> f64 {
        if x <= 0.5 {
            self.a * sinh(self.k1 * PI * x)
        } else {
            self.b * sin(self.k2 * PI * (1.0 - x))
        }
    }

    /// Left and right derivatives at the step: (ψ₁′(½), ψ₂′(½)).
    pub fn derivatives_at_step(&self) -> (f64, f64) {
        let d1 = self.a * self.k1 * PI * cosh(self.k1 * PI / 2.0);
        let d2 = -self.b * self.k2 * PI * cos(self.k2 * PI / 2.0);
        (d1, d2)
    }

    /// Value mismatch and derivative mismatch at x = ½.
    pub fn matching_residuals(&self) -> (f64, f64) {
        let v1 = self.a * sinh(self.k1 * PI / 2.0);
        let v2 = self.b * sin(self.k2 * PI / 2.0);
        let (d1, d2) = self.derivatives_at_step();
        (v1 - v2, d1 - d2)
    }

    /// Energy k₂² (in box units).
    pub fn energy(&self) -> f64 {
        self.k2 * self.k2
    }
}

/// Solves k₁ coth(πk₁/2) = −k₂ cot(πk₂/2) with k₁ = √(Ω − k₂²) by bisection
/// and fixes the amplitudes by continuity and unit norm.
pub fn stepwell_analytic(omega: f64) -> Result<StepWellSolution> {
    if !omega.is_finite() {
        return Err(Error::NonFinite("step height".into()));
    }
    let f = |k2: f64| k_coth(sqrt((omega - k2 * k2).max(0.0))) + k2 / tan(PI * k2 / 2.0);
    // For k₂ ≤ 1 both terms are non-negative, and the cotangent diverges to
    // −∞ at k₂ = 2, so the ground-state root lies in (1, min(√Ω, 2)).
    let lo0 = 1.0;
    let hi0 = sqrt(omega.max(0.0)).min(2.0);
    if hi0 <= lo0 || (hi0 < 2.0 && f(hi0) >= 0.0) {
        return Err(Error::NoSolution(alloc::format!(
            "no ground state below the step for Omega = {omega} (threshold {STEPWELL_THRESHOLD})"
        )));
    }
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k2 = 0.5 * (lo + hi);
    let k1 = sqrt(omega - k2 * k2);
    // ∫₀^½ sinh²(k₁πx) dx and ∫_½^1 sin²(k₂π(1−x)) dx.
    let left = if k1 * PI < 1e-6 {
        // Series for small k₁: (k₁π)²/24.
        (k1 * PI) * (k1 * PI) / 24.0
    } else {
        sinh(k1 * PI) / (4.0 * k1 * PI) - 0.25
    };
    let right = 0.25 - sin(k2 * PI) / (4.0 * k2 * PI);
    let ratio = sinh(k1 * PI / 2.0) / sin(k2 * PI / 2.0);
    let a = 1.0 / sqrt(left + ratio * ratio * right);
    Ok(StepWellSolution { omega, k1, k2, a, b: a * ratio })
}

/// How the numerical step-well ground state is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepWellMethod {
    /// Exact matrix elements in the momentum basis.
    Momentum,
    /// Kinetic energy from the DST, potential diagonal on the grid.
    Mixed,
}

/// Numerical step-well ground state: (energy, momentum coefficients).
pub fn stepwell_ground(omega: f64, n_max: usize, method: StepWellMethod) -> Result<(f64, Vec<C64>)> {
    let g = Grid1D::new(n_max)?;
    let h = match method {
        StepWellMethod::Momentum => stepwell_hamiltonian_momentum(omega, n_max)?,
        StepWellMethod::Mixed => stepwell_hamiltonian_position(omega, &g)?,
    };
    let e = eigh_dense(&h)?;
    let v: Vec<C64> = e.eigenvectors[0].to_vec();
    let u = match method {
        StepWellMethod::Momentum => v,
        StepWellMethod::Mixed => dst1(&v),
    };
    Ok((e.eigenvalues[0], u))
}

/// ⟨ψ₀|γ⟩ between the analytic solution and a state given by momentum
/// coefficients, by Gauss–Legendre quadrature with 8(n_max+1) nodes on each
/// side of the step.
pub fn stepwell_overlap(sol: &StepWellSolution, u: &[C64]) -> Result<C64> {
    let rule = GaussLegendre::new(8 * (u.len() + 1))?;
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in [(0.0, 0.5), (0.5, 1.0)] {
        for (x, w) in rule.mapped(a, b) {
            acc += wavefunction_from_momentum(u, x) * (w * sol.psi(x));
        }
    }
    Ok(acc)
}

/// 1 − |⟨ψ₀|γ_{n_max}⟩|² for the chosen method.
pub fn stepwell_infidelity(omega: f64, n_max: usize, method: StepWellMethod) -> Result<f64> {
    let sol = stepwell_analytic(omega)?;
    let (_, u) = stepwell_ground(omega, n_max, method)?;
    Ok(1.0 - stepwell_overlap(&sol, &u)?.norm_sqr())
}

/// Least-squares fit of y = c·x^p in log-log space; returns (c, p).
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("power-law fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid("power-law fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| log(*v)).collect();
    let ly: Vec<f64> = ys.iter().map(|v| log(*v)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("power-law fit needs distinct x values"));
    }
    let p = sxy / sxx;
    Ok((exp(my - p * mx), p))
}
