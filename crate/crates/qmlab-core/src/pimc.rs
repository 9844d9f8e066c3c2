//! Monte Carlo integration and imaginary-time path sampling for a single
//! particle in a 1D harmonic oscillator.
//!
//! Lengths are in units of the oscillator length x̂ = √(ħ/mω) and the inverse
//! temperature enters only through ζ = βħω. A path of M imaginary-time slices
//! has the action
//!
//! S = ½[(ζ/M)(x₀²/2 + Σ₁^{M−1} x_m² + x_M²/2) + (M/ζ) Σ₁^M (x_m − x_{m−1})²],
//!
//! and the Metropolis–Hastings samplers draw paths with weight e^{−S}. Open
//! paths keep both end points fixed; closed paths (rings) store M beads and
//! close on the first one.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::math::*;

// ---------------------------------------------------------------------------
// Random numbers

/// Seedable deterministic generator. Identical seeds (and stream indices)
/// give bitwise-identical streams on every platform.
#[derive(Clone, Debug)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    /// Generator for `seed`, stream 0.
    pub fn seed(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream `stream` for `seed`; used to give each of several
    /// parallel chains its own sequence.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self(inner)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// Uniform on [a, b).
    pub fn uniform_in(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Uniform integer in lo..hi (hi exclusive). Panics if the range is
    /// empty.
    pub fn index(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..hi)
    }
}

// ---------------------------------------------------------------------------
// Plain and weighted Monte Carlo integration

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    /// Sample mean.
    pub mean: f64,
    /// √(sample variance / M), with the unbiased variance.
    pub stderr: f64,
}

/// Mean and standard error of a list of values.
pub fn estimate(values: &[f64]) -> Result<Estimate> {
    let m = values.len();
    if m < 2 {
        return Err(invalid("a standard error needs at least two samples"));
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    Ok(Estimate { mean, stderr: sqrt(var / m as f64) })
}

/// ∫₀¹ f(x) dx estimated from `m` uniform draws.
pub fn mc_integrate<F: FnMut(f64) -> f64>(mut f: F, m: usize, rng: &mut Rng) -> Result<Estimate> {
    if m < 2 {
        return Err(invalid("need at least two samples"));
    }
    let values: Vec<f64> = (0..m).map(|_| f(rng.uniform())).collect();
    estimate(&values)
}

/// ∫₀¹ f(x) p(x) dx estimated by drawing x = q⁻¹(z) for uniform z, where q is
/// the cumulative weight of the normalized density p.
pub fn mc_integrate_weighted<F, Q>(mut f: F, mut inverse_cdf: Q, m: usize, rng: &mut Rng) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
    Q: FnMut(f64) -> f64,
{
    if m < 2 {
        return Err(invalid("need at least two samples"));
    }
    let values: Vec<f64> = (0..m).map(|_| f(inverse_cdf(rng.uniform()))).collect();
    estimate(&values)
}

/// Kolmogorov–Smirnov distance sup_x |F_n(x) − F(x)| between the empirical
/// distribution of `samples` and the distribution function `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("no samples"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("sample is NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Metropolis–Hastings

/// Accepted and rejected proposals of one move type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MoveStats {
    /// Accepted proposals.
    pub accepted: u64,
    /// Rejected proposals.
    pub rejected: u64,
}

impl MoveStats {
    /// accepted + rejected.
    pub fn proposals(&self) -> u64 {
        self.accepted + self.rejected
    }

    /// Fraction of accepted proposals (0 if nothing was proposed).
    pub fn acceptance(&self) -> f64 {
        match self.proposals() {
            0 => 0.0,
            p => self.accepted as f64 / p as f64,
        }
    }

    fn record(&mut self, accepted: bool) {
        if accepted {
            self.accepted += 1;
        } else {
            self.rejected += 1;
        }
    }

    /// Sum of two counters, for merging independent chains.
    pub fn merged(self, other: Self) -> Self {
        Self { accepted: self.accepted + other.accepted, rejected: self.rejected + other.rejected }
    }
}

/// Per-move-type counters of a chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChainStats {
    /// Single-point (bead) displacements; the only move of [`mh_chain`].
    pub single: MoveStats,
    /// Rigid displacements of a whole ring.
    pub shift: MoveStats,
}

impl ChainStats {
    /// Counters summed over move types.
    pub fn total(&self) -> MoveStats {
        self.single.merged(self.shift)
    }

    /// Sum of two chains' counters.
    pub fn merged(self, other: Self) -> Self {
        Self { single: self.single.merged(other.single), shift: self.shift.merged(other.shift) }
    }
}

/// Metropolis acceptance probability min(1, e^{−ΔS}) of a symmetric proposal
/// that changes the action by ΔS.
pub fn acceptance_probability(delta_action: f64) -> f64 {
    if delta_action <= 0.0 {
        1.0
    } else {
        exp(-delta_action)
    }
}

/// Metropolis–Hastings chain of length `m` (including the start `x1`) for
/// the unnormalized density `p` on [0, 1], with uniform proposals on
/// [x − d, x + d]. Proposals outside [0, 1] are rejected.
pub fn mh_chain<P: FnMut(f64) -> f64>(
    mut p: P,
    x1: f64,
    d: f64,
    m: usize,
    rng: &mut Rng,
) -> Result<(Vec<f64>, ChainStats)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid("step size d must be positive"));
    }
    if m == 0 {
        return Err(invalid("chain length must be at least 1"));
    }
    if !(0.0..=1.0).contains(&x1) {
        return Err(invalid("starting point must lie in [0, 1]"));
    }
    let mut stats = ChainStats::default();
    let mut chain = Vec::with_capacity(m);
    let mut x = x1;
    let mut px = p(x);
    chain.push(x);
    for _ in 1..m {
        let y = x + rng.uniform_in(-d, d);
        let (prob, py) = if !(0.0..=1.0).contains(&y) {
            (0.0, 0.0)
        } else {
            let py = p(y);
            (if py >= px { 1.0 } else { py / px }, py)
        };
        let accept = prob > rng.uniform();
        stats.single.record(accept);
        if accept {
            x = y;
            px = py;
        }
        chain.push(x);
    }
    Ok((chain, stats))
}

/// Transition matrix T[i][j] = P(i → j) of the Metropolis algorithm on a
/// finite set of states with weights `w`, proposing each of the states
/// i ± 1, …, i ± `max_jump` with probability 1/(2·max_jump); proposals off
/// either end are rejected. Its stationary distribution is w/Σw.
pub fn metropolis_matrix(weights: &[f64], max_jump: usize) -> Result<DMatrix<f64>> {
    let n = weights.len();
    if n == 0 || max_jump == 0 {
        return Err(invalid("need at least one state and a positive jump range"));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(invalid("weights must be positive and finite"));
    }
    let q = 1.0 / (2 * max_jump) as f64;
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut stay = 1.0;
        for j in i.saturating_sub(max_jump)..(i + max_jump + 1).min(n) {
            if j != i {
                let p = q * acceptance_probability(log(weights[i]) - log(weights[j]));
                t[(i, j)] = p;
                stay -= p;
            }
        }
        t[(i, i)] = stay;
    }
    Ok(t)
}

/// Stationary distribution π = πT of a row-stochastic matrix, normalized to
/// Σπ = 1, from the linear system (Tᵀ − 1)π = 0 with one equation replaced by
/// the normalization.
pub fn stationary_distribution(t: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = t.nrows();
    if n == 0 || t.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: t.ncols() });
    }
    let mut a = t.transpose() - DMatrix::identity(n, n);
    let mut rhs = nalgebra::DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::NoSolution("singular transition matrix".into()))?;
    Ok(sol.iter().copied().collect())
}

// ---------------------------------------------------------------------------
// Paths and their action

/// Boundary condition of a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// M + 1 beads; the first and last are fixed.
    Open,
    /// M beads; the path closes on the first bead.
    Closed,
}

/// An imaginary-time path in units of x̂.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    beads: Vec<f64>,
    kind: PathKind,
    zeta: f64,
}

fn check_path_args(slices: usize, zeta: f64) -> Result<()> {
    if slices < 2 {
        return Err(invalid("a path needs at least two time slices"));
    }
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta must be positive and finite"));
    }
    Ok(())
}

impl Path {
    /// Open path interpolating linearly from x0 to x_end in `slices` steps.
    pub fn straight(x0: f64, x_end: f64, slices: usize, zeta: f64) -> Result<Self> {
        check_path_args(slices, zeta)?;
        let beads = (0..=slices).map(|m| x0 + (x_end - x0) * m as f64 / slices as f64).collect();
        Self::from_beads(beads, PathKind::Open, zeta)
    }

    /// Closed path with all `slices` beads at x.
    pub fn constant_ring(x: f64, slices: usize, zeta: f64) -> Result<Self> {
        check_path_args(slices, zeta)?;
        Self::from_beads(alloc::vec![x; slices], PathKind::Closed, zeta)
    }

    /// Path from explicit bead positions (M + 1 for open paths, M for closed
    /// ones).
    pub fn from_beads(beads: Vec<f64>, kind: PathKind, zeta: f64) -> Result<Self> {
        let slices = match kind {
            PathKind::Open => beads.len().saturating_sub(1),
            PathKind::Closed => beads.len(),
        };
        check_path_args(slices, zeta)?;
        if beads.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("bead position".into()));
        }
        Ok(Self { beads, kind, zeta })
    }

    /// Bead positions.
    pub fn beads(&self) -> &[f64] {
        &self.beads
    }

    /// Boundary condition.
    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// ζ = βħω.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Number of time slices M.
    pub fn slices(&self) -> usize {
        match self.kind {
            PathKind::Open => self.beads.len() - 1,
            PathKind::Closed => self.beads.len(),
        }
    }

    // Beads x₀ … x_M with the closing bead appended for rings.
    fn closed_over(&self) -> impl Iterator<Item = f64> + '_ {
        let tail = match self.kind {
            PathKind::Open => None,
            PathKind::Closed => Some(self.beads[0]),
        };
        self.beads.iter().copied().chain(tail)
    }

    /// Potential part ½(ζ/M)(x₀²/2 + Σ x_m² + x_M²/2).
    pub fn potential_action(&self) -> f64 {
        let xs: Vec<f64> = self.closed_over().collect();
        let m = xs.len() - 1;
        let inner: f64 = xs[1..m].iter().map(|x| x * x).sum();
        let ends = 0.5 * (xs[0] * xs[0] + xs[m] * xs[m]);
        0.5 * (self.zeta / m as f64) * (inner + ends)
    }

    /// Kinetic part ½(M/ζ)Σ(x_m − x_{m−1})².
    pub fn kinetic_action(&self) -> f64 {
        let xs: Vec<f64> = self.closed_over().collect();
        let m = xs.len() - 1;
        let sum: f64 = xs.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
        0.5 * (m as f64 / self.zeta) * sum
    }

    /// Total action S.
    pub fn action(&self) -> f64 {
        self.potential_action() + self.kinetic_action()
    }

    /// Neighbours of bead i: (previous, next).
    fn neighbours(&self, i: usize) -> (f64, f64) {
        let n = self.beads.len();
        match self.kind {
            PathKind::Open => (self.beads[i - 1], self.beads[i + 1]),
            PathKind::Closed => (self.beads[(i + n - 1) % n], self.beads[(i + 1) % n]),
        }
    }

    /// Change of the action when bead i moves by dx. For open paths i must be
    /// an interior bead.
    pub fn bead_move_delta(&self, i: usize, dx: f64) -> f64 {
        let m = self.slices() as f64;
        let x = self.beads[i];
        let y = x + dx;
        let (a, b) = self.neighbours(i);
        let pot = 0.5 * (self.zeta / m) * (y * y - x * x);
        let kin = 0.5 * (m / self.zeta) * ((y - a) * (y - a) - (x - a) * (x - a) + (b - y) * (b - y) - (b - x) * (b - x));
        pot + kin
    }

    /// Change of the action when a closed path moves rigidly by dx. The
    /// kinetic part is unchanged.
    pub fn shift_delta(&self, dx: f64) -> f64 {
        let m = self.beads.len() as f64;
        let sum: f64 = self.beads.iter().sum();
        0.5 * (self.zeta / m) * (2.0 * dx * sum + m * dx * dx)
    }

    /// Mean bead position.
    pub fn mean(&self) -> f64 {
        self.beads.iter().sum::<f64>() / self.beads.len() as f64
    }
}

/// A sequence of sampled paths of equal length, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    kind: PathKind,
    zeta: f64,
    beads_per_path: usize,
    data: Vec<f64>,
    /// Move counters over the whole run, burn-in included.
    pub stats: ChainStats,
}

impl PathEnsemble {
    fn new(kind: PathKind, zeta: f64, beads_per_path: usize, capacity: usize) -> Self {
        Self {
            kind,
            zeta,
            beads_per_path,
            data: Vec::with_capacity(capacity * beads_per_path),
            stats: ChainStats::default(),
        }
    }

    /// Number of stored paths.
    pub fn len(&self) -> usize {
        self.data.len() / self.beads_per_path.max(1)
    }

    /// True if no path is stored.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Boundary condition of the stored paths.
    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// ζ of the sampled distribution.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Beads stored per path (M + 1 open, M closed).
    pub fn beads_per_path(&self) -> usize {
        self.beads_per_path
    }

    /// The i-th path's beads.
    pub fn path(&self, i: usize) -> &[f64] {
        &self.data[i * self.beads_per_path..(i + 1) * self.beads_per_path]
    }

    /// Iterator over the stored paths.
    pub fn paths(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.beads_per_path)
    }

    /// All beads of all paths, path by path.
    pub fn all_beads(&self) -> &[f64] {
        &self.data
    }

    /// Mean bead position of each path.
    pub fn path_means(&self) -> Vec<f64> {
        self.paths().map(|p| p.iter().sum::<f64>() / p.len() as f64).collect()
    }

    /// Concatenation of ensembles sampled with the same parameters (e.g.
    /// independent chains run in parallel); counters are summed.
    pub fn concat(parts: &[PathEnsemble]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("nothing to concatenate"))?;
        let mut out = Self::new(first.kind, first.zeta, first.beads_per_path, 0);
        for p in parts {
            if p.kind != first.kind || p.beads_per_path != first.beads_per_path || p.zeta != first.zeta {
                return Err(invalid("ensembles were sampled with different parameters"));
            }
            out.data.extend_from_slice(&p.data);
            out.stats = out.stats.merged(p.stats);
        }
        Ok(out)
    }

    fn push(&mut self, beads: &[f64]) {
        self.data.extend_from_slice(beads);
    }
}

/// Settings of [`sample_open_paths`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OpenPathParams {
    /// Fixed start x̃₀.
    pub x0: f64,
    /// Fixed end x̃_M.
    pub x_end: f64,
    /// Number of time slices M ≥ 2.
    pub slices: usize,
    /// ζ = βħω.
    pub zeta: f64,
    /// Single-bead proposals are uniform on [−d, d].
    pub step: f64,
    /// Total sweeps; one sweep is M − 1 single-bead proposals.
    pub sweeps: usize,
    /// Sweeps discarded before recording; `None` discards the first 10%.
    pub burn_in: Option<usize>,
}

/// Settings of [`sample_closed_paths`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedPathParams {
    /// Position of all beads of the starting ring.
    pub x_start: f64,
    /// Number of beads M ≥ 2.
    pub slices: usize,
    /// ζ = βħω.
    pub zeta: f64,
    /// Single-bead proposals are uniform on [−d₁, d₁].
    pub bead_step: f64,
    /// Whole-ring proposals are uniform on [−d₂, d₂].
    pub shift_step: f64,
    /// Probability f of choosing a single-bead move; a ring shift otherwise.
    pub bead_fraction: f64,
    /// Total sweeps; one sweep is M proposals.
    pub sweeps: usize,
    /// Sweeps discarded before recording; `None` discards the first 10%.
    pub burn_in: Option<usize>,
}

impl ClosedPathParams {
    /// Step sizes tuned for the oscillator: d₁ = 2.8·√(ζ/2M), about 2.8
    /// standard deviations of a bead given its neighbours, and
    /// d₂ = 3/√ζ, three standard deviations of the ring center. At ζ = 1,
    /// M = 20 these reduce to d₁ ≈ 0.44, d₂ = 3. Half the moves are bead
    /// moves.
    pub fn harmonic_defaults(zeta: f64, slices: usize, sweeps: usize) -> Self {
        Self {
            x_start: 0.0,
            slices,
            zeta,
            bead_step: 2.8 * sqrt(zeta / (2.0 * slices as f64)),
            shift_step: 3.0 / sqrt(zeta),
            bead_fraction: 0.5,
            sweeps,
            burn_in: None,
        }
    }
}

fn burn_in_sweeps(sweeps: usize, burn_in: Option<usize>) -> Result<usize> {
    let b = burn_in.unwrap_or(sweeps / 10);
    if b >= sweeps {
        return Err(invalid("burn-in must be shorter than the run"));
    }
    Ok(b)
}

fn metropolis_step(delta: f64, rng: &mut Rng) -> bool {
    acceptance_probability(delta) > rng.uniform()
}

/// Metropolis sampling of open paths between fixed end points, starting
/// from the straight path. Each proposal displaces one interior bead chosen
/// uniformly at random; the path after every sweep past the burn-in is
/// recorded.
pub fn sample_open_paths(params: &OpenPathParams, rng: &mut Rng) -> Result<PathEnsemble> {
    let OpenPathParams { x0, x_end, slices, zeta, step, sweeps, burn_in } = *params;
    if !(step >= 0.0 && step.is_finite()) {
        return Err(invalid("step size must be nonnegative"));
    }
    let burn = burn_in_sweeps(sweeps, burn_in)?;
    let mut path = Path::straight(x0, x_end, slices, zeta)?;
    let mut ens = PathEnsemble::new(PathKind::Open, zeta, slices + 1, sweeps - burn);
    for sweep in 0..sweeps {
        for _ in 0..slices - 1 {
            let i = rng.index(1, slices);
            let dx = rng.uniform_in(-step, step);
            let accept = metropolis_step(path.bead_move_delta(i, dx), rng);
            ens.stats.single.record(accept);
            if accept {
                path.beads[i] += dx;
            }
        }
        if sweep >= burn {
            ens.push(&path.beads);
        }
    }
    Ok(ens)
}

/// Metropolis sampling of closed paths with two move types: displacing one
/// bead (probability f) or the whole ring (probability 1 − f). Starts from
/// the constant ring at `x_start`; the ring after every sweep past the
/// burn-in is recorded.
pub fn sample_closed_paths(params: &ClosedPathParams, rng: &mut Rng) -> Result<PathEnsemble> {
    let ClosedPathParams { x_start, slices, zeta, bead_step, shift_step, bead_fraction, sweeps, burn_in } = *params;
    if !(0.0..=1.0).contains(&bead_fraction) {
        return Err(invalid("bead-move fraction must lie in [0, 1]"));
    }
    if !(bead_step >= 0.0 && shift_step >= 0.0 && bead_step.is_finite() && shift_step.is_finite()) {
        return Err(invalid("step sizes must be nonnegative"));
    }
    let burn = burn_in_sweeps(sweeps, burn_in)?;
    let mut path = Path::constant_ring(x_start, slices, zeta)?;
    let mut ens = PathEnsemble::new(PathKind::Closed, zeta, slices, sweeps - burn);
    // Running bead sum keeps ring shifts O(1); refreshed every sweep.
    let mut sum = path.beads.iter().sum::<f64>();
    let m = slices as f64;
    for sweep in 0..sweeps {
        for _ in 0..slices {
            if rng.uniform() > bead_fraction {
                let dx = rng.uniform_in(-shift_step, shift_step);
                let delta = 0.5 * (zeta / m) * (2.0 * dx * sum + m * dx * dx);
                let accept = metropolis_step(delta, rng);
                ens.stats.shift.record(accept);
                if accept {
                    path.beads.iter_mut().for_each(|x| *x += dx);
                    sum += m * dx;
                }
            } else {
                let i = rng.index(0, slices);
                let dx = rng.uniform_in(-bead_step, bead_step);
                let accept = metropolis_step(path.bead_move_delta(i, dx), rng);
                ens.stats.single.record(accept);
                if accept {
                    path.beads[i] += dx;
                    sum += dx;
                }
            }
        }
        sum = path.beads.iter().sum();
        if sweep >= burn {
            ens.push(&path.beads);
        }
    }
    Ok(ens)
}

// ---------------------------------------------------------------------------
// Analytic density matrices

fn check_zeta(zeta: f64) -> Result<()> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(invalid("zeta must be positive and finite"));
    }
    Ok(())
}

/// Gaussian kernel √(n/π)·exp[−s²·a − d²·b] with s = (x+x′)/2, d = (x−x′)/2;
/// normalized on the diagonal when n = a.
fn gaussian_kernel(norm: f64, a: f64, b: f64, x: f64, xp: f64) -> f64 {
    let s = 0.5 * (x + xp);
    let d = 0.5 * (x - xp);
    sqrt(norm / PI) * exp(-s * s * a - d * d * b)
}

/// Exact thermal density matrix ⟨x′|ρ|x⟩ of the oscillator, normalized to
/// unit trace (x̂ = 1).
pub fn ho_exact(zeta: f64, x: f64, xp: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let t = tanh(0.5 * zeta);
    Ok(gaussian_kernel(t, t, 1.0 / t, x, xp))
}

/// Thermal density ρ(x) = ⟨x|ρ|x⟩.
pub fn ho_density(zeta: f64, x: f64) -> Result<f64> {
    ho_exact(zeta, x, x)
}

/// ⟨x²⟩ of the thermal state, 1/(2 tanh(ζ/2)).
pub fn ho_second_moment(zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(0.5 / tanh(0.5 * zeta))
}

/// Normalized density matrix from the M-slice Trotter path integral
/// evaluated in closed form, M ∈ {1, 2, 3}.
///
/// The diagonal of each form is normalized to one. For M = 3 the prefactor
/// is therefore √(a/π) with a the coefficient of ((x+x′)/2)²; it differs
/// from √(243ζ(16+ζ²)/(32(9+ζ²)(27+ζ²))/π), an expression that agrees only
/// to leading order in ζ and does not normalize the diagonal.
pub fn ho_finite_m(zeta: f64, m: usize, x: f64, xp: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let z2 = zeta * zeta;
    let (a, b) = match m {
        1 => (0.5 * zeta, (4.0 + z2) / (2.0 * zeta)),
        2 => (0.25 * zeta * (16.0 + z2) / (8.0 + z2), (8.0 + z2) / (4.0 * zeta)),
        3 => (zeta / 6.0 * (27.0 + z2) / (9.0 + z2), (9.0 + z2) * (36.0 + z2) / (6.0 * zeta * (27.0 + z2))),
        _ => return Err(invalid("closed forms exist for M = 1, 2, 3 only")),
    };
    Ok(gaussian_kernel(a, a, b, x, xp))
}

/// Unnormalized single-slice imaginary-time kernel
/// (2πζ)^{−½} exp[−(ζ/4)(x² + x′²) − (x − x′)²/(2ζ)].
pub fn trotter_kernel_one_slice(zeta: f64, x: f64, xp: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(exp(-0.25 * zeta * (x * x + xp * xp) - (x - xp) * (x - xp) / (2.0 * zeta)) / sqrt(2.0 * PI * zeta))
}

/// Exact real-time propagator ⟨x′|e^{−iHt/ħ}|x⟩ of the oscillator
/// (Mehler kernel) at phase θ = ωt ∈ (0, π).
pub fn ho_propagator_exact(theta: f64, x: f64, xp: f64) -> Result<C64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(invalid("theta must lie in (0, π)"));
    }
    let s = sin(theta);
    let phase = ((x * x + xp * xp) * cos(theta) - 2.0 * x * xp) / (2.0 * s);
    Ok(C64::from_polar(1.0, phase - 0.25 * PI) / sqrt(2.0 * PI * s))
}

/// Single-slice real-time path integral
/// (2πiθ)^{−½} exp[i(x′−x)²/(2θ) − iθ(x² + x′²)/4].
pub fn ho_propagator_one_slice(theta: f64, x: f64, xp: f64) -> Result<C64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta must be positive"));
    }
    let phase = (xp - x) * (xp - x) / (2.0 * theta) - 0.25 * theta * (x * x + xp * xp);
    Ok(C64::from_polar(1.0, phase - 0.25 * PI) / sqrt(2.0 * PI * theta))
}

// ---------------------------------------------------------------------------
// Histograms

/// Bin layout of a histogram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Binning {
    /// Width 2·IQR·n^{−1/3} over the sample range.
    FreedmanDiaconis,
    /// Fixed number of equal bins over the sample range.
    Count(usize),
    /// Equal bins on [lo, hi]; samples outside still count in the
    /// normalization.
    Range {
        /// Lower edge.
        lo: f64,
        /// Upper edge.
        hi: f64,
        /// Number of bins.
        bins: usize,
    },
}

/// Histogram normalized as a probability density.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// Bin edges (bins + 1 values, ascending, equally spaced).
    pub edges: Vec<f64>,
    /// Samples per bin.
    pub counts: Vec<u64>,
    /// All samples, including any outside the edges.
    pub total: u64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = floor(pos) as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

impl Histogram {
    /// Histogram of `samples` with the given binning.
    pub fn from_samples(samples: &[f64], binning: Binning) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("no samples"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample".into()));
        }
        let (lo, hi, bins) = match binning {
            Binning::Range { lo, hi, bins } => (lo, hi, bins),
            Binning::Count(bins) => {
                let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                (lo, hi, bins)
            }
            Binning::FreedmanDiaconis => {
                let mut sorted = samples.to_vec();
                sorted.sort_by(f64::total_cmp);
                let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
                let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
                let width = 2.0 * iqr / cbrt(sorted.len() as f64);
                let bins = if width > 0.0 { ceil((hi - lo) / width).max(1.0) as usize } else { 1 };
                (lo, hi, bins.min(100_000))
            }
        };
        if bins == 0 {
            return Err(invalid("need at least one bin"));
        }
        // A degenerate sample range still gets a bin of nonzero width.
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = alloc::vec![0u64; bins];
        for &x in samples {
            if x < lo || x > hi {
                continue;
            }
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(Self { edges, counts, total: samples.len() as u64 })
    }

    /// Number of bins.
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin width.
    pub fn width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    /// Bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// count / (total · width) per bin.
    pub fn density(&self) -> Vec<f64> {
        let norm = 1.0 / (self.total as f64 * self.width());
        self.counts.iter().map(|&c| c as f64 * norm).collect()
    }

    /// Σ density · width: 1 unless samples fell outside the edges.
    pub fn integral(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.total as f64
    }
}

fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

/// Thermal density estimate from closed paths: a normalized histogram of all
/// beads of all rings. With `centered`, each ring is first moved so that its
/// mean sits at the origin, which shows the ring size alone.
pub fn density_from_rings(ensemble: &PathEnsemble, binning: Binning, centered: bool) -> Result<Histogram> {
    if ensemble.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    if ensemble.kind() != PathKind::Closed {
        return Err(invalid("densities are estimated from closed paths"));
    }
    if centered {
        let shifted: Vec<f64> = ensemble
            .paths()
            .flat_map(|p| {
                let mean = p.iter().sum::<f64>() / p.len() as f64;
                p.iter().map(move |x| x - mean)
            })
            .collect();
        Histogram::from_samples(&shifted, binning)
    } else {
        Histogram::from_samples(ensemble.all_beads(), binning)
    }
}

/// Goodness of fit of the bead distribution of a closed-path ensemble
/// against expected bin probabilities, allowing for correlated samples.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchFit {
    /// Hotelling's T² = B·dᵀS⁻¹d of the mean deviation d over the first k
    /// bins, with S the covariance between batches. Distributed as χ²ₖ for
    /// many batches.
    pub t_squared: f64,
    /// Degrees of freedom k: bins minus one (the fractions sum to a
    /// constant).
    pub dof: usize,
    /// Number of batches B.
    pub batches: usize,
}

impl BatchFit {
    /// T²·(B − k)/(k(B − 1)), distributed as F(k, B − k) for Gaussian batch
    /// means; use this for p-values when B is not much larger than k.
    pub fn f_statistic(&self) -> f64 {
        let (k, b) = (self.dof as f64, self.batches as f64);
        self.t_squared * (b - k) / (k * (b - 1.0))
    }
}

/// Compare the binned bead fractions of `ensemble` with the expected bin
/// probabilities `expected[i]` for bins [edges[i], edges[i+1]). The recorded
/// paths are split into consecutive batches; the covariance of the bin
/// fractions is estimated from the spread between batches, so
/// autocorrelation along the chain and correlation between bins (beads of a
/// ring move together) widen the error model instead of inflating the
/// statistic. Batches must be long compared with the autocorrelation time.
pub fn batch_fit(ensemble: &PathEnsemble, edges: &[f64], expected: &[f64], batches: usize) -> Result<BatchFit> {
    let bins = edges.len().saturating_sub(1);
    if bins < 2 || expected.len() != bins {
        return Err(Error::DimensionMismatch { expected: bins, found: expected.len() });
    }
    let k = bins - 1;
    if batches <= k + 1 || ensemble.len() < batches {
        return Err(invalid("need more batches than bins, each with at least one path"));
    }
    let per_batch = ensemble.len() / batches;
    let mut fractions = DMatrix::<f64>::zeros(batches, bins);
    for b in 0..batches {
        let mut n = 0usize;
        for p in b * per_batch..(b + 1) * per_batch {
            for &x in ensemble.path(p) {
                n += 1;
                if x < edges[0] || x >= edges[bins] {
                    continue;
                }
                let i = edges.partition_point(|e| *e <= x) - 1;
                fractions[(b, i)] += 1.0;
            }
        }
        fractions.row_mut(b).iter_mut().for_each(|v| *v /= n as f64);
    }
    let bf = batches as f64;
    let mean: Vec<f64> = (0..k).map(|i| fractions.column(i).sum() / bf).collect();
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for b in 0..batches {
        for i in 0..k {
            for j in 0..k {
                cov[(i, j)] += (fractions[(b, i)] - mean[i]) * (fractions[(b, j)] - mean[j]);
            }
        }
    }
    cov /= bf - 1.0;
    let d = nalgebra::DVector::from_iterator(k, (0..k).map(|i| mean[i] - expected[i]));
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::NoSolution("batch covariance is singular; use fewer or wider bins".into()))?;
    let t_squared = bf * d.dot(&chol.solve(&d));
    Ok(BatchFit { t_squared, dof: k, batches })
}

/// Probability mass of the exact thermal density on [a, b], via the error
/// function.
pub fn ho_bin_probability(zeta: f64, a: f64, b: f64) -> Result<f64> {
    check_zeta(zeta)?;
    let s = sqrt(tanh(0.5 * zeta));
    Ok(0.5 * (libm::erf(s * b) - libm::erf(s * a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = Rng::seed(7);
            (0..5).map(|_| r.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut r = Rng::seed(7);
            (0..5).map(|_| r.uniform()).collect()
        };
        assert_eq!(a, b);
        let mut s1 = Rng::stream(7, 1);
        assert_ne!(s1.uniform(), a[0]);
        let mut r = Rng::seed(1);
        for _ in 0..1000 {
            let k = r.index(2, 5);
            assert!((2..5).contains(&k));
            let u = r.uniform_in(-1.0, 3.0);
            assert!((-1.0..3.0).contains(&u));
        }
    }

    #[test]
    fn action_trivial_cases() {
        let p = Path::from_beads(alloc::vec![0.0; 5], PathKind::Open, 1.0).unwrap();
        assert_eq!(p.action(), 0.0);
        let c = 0.7;
        let zeta = 1.3;
        let ring = Path::constant_ring(c, 8, zeta).unwrap();
        assert!((ring.action() - zeta * c * c / 2.0).abs() < 1e-14);
        assert_eq!(ring.kinetic_action(), 0.0);
    }

    #[test]
    fn local_deltas_match_full_action() {
        let open = Path::from_beads(alloc::vec![0.1, -0.3, 0.8, 0.2, 1.0], PathKind::Open, 0.7).unwrap();
        for i in 1..4 {
            let mut moved = open.clone();
            moved.beads[i] += 0.37;
            assert!((moved.action() - open.action() - open.bead_move_delta(i, 0.37)).abs() < 1e-12);
        }
        let ring = Path::from_beads(alloc::vec![0.1, -0.3, 0.8, 0.2], PathKind::Closed, 2.1).unwrap();
        for i in 0..4 {
            let mut moved = ring.clone();
            moved.beads[i] -= 0.21;
            assert!((moved.action() - ring.action() - ring.bead_move_delta(i, -0.21)).abs() < 1e-12);
        }
        let mut shifted = ring.clone();
        shifted.beads.iter_mut().for_each(|x| *x += 0.5);
        assert!((shifted.action() - ring.action() - ring.shift_delta(0.5)).abs() < 1e-12);
        assert!((shifted.kinetic_action() - ring.kinetic_action()).abs() < 1e-12);
    }

    #[test]
    fn finite_m_rejects_unsupported_orders() {
        assert!(ho_finite_m(1.0, 4, 0.0, 0.0).is_err());
        assert!(ho_finite_m(1.0, 0, 0.0, 0.0).is_err());
        assert!(ho_exact(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn histogram_normalization() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.618).fract()).collect();
        for binning in [Binning::FreedmanDiaconis, Binning::Count(7), Binning::Range { lo: 0.0, hi: 1.0, bins: 10 }] {
            let h = Histogram::from_samples(&xs, binning).unwrap();
            let integral: f64 = h.density().iter().map(|d| d * h.width()).sum();
            assert!((integral - 1.0).abs() < 1e-12);
            assert_eq!(h.centers().len(), h.bins());
        }
        let h = Histogram::from_samples(&[2.0; 4], Binning::FreedmanDiaconis).unwrap();
        assert_eq!(h.counts, alloc::vec![4]);
    }

    #[test]
    fn metropolis_matrix_is_stochastic() {
        let t = metropolis_matrix(&[1.0, 2.0, 0.5, 3.0], 2).unwrap();
        for i in 0..4 {
            let s: f64 = t.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(t.row(i).iter().all(|v| *v >= 0.0));
        }
    }
}
