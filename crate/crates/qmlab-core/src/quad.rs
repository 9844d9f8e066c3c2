//! Gauss–Legendre quadrature.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math::*;

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    /// n-point rule, exact for polynomials of degree 2n − 1.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("a quadrature rule needs at least one node"));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // The middle node is exactly zero.
            let (_, d) = legendre(n, 0.0);
            nodes[n / 2] = 0.0;
            weights[n / 2] = 2.0 / (d * d);
        }
        Ok(Self { nodes, weights })
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: a rule has at least one node.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on [−1, 1] in ascending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`nodes`](Self::nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    /// ∫ₐᵇ f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// ∫ f over consecutive panels [p₀,p₁], [p₁,p₂], … with an n-point rule on
/// each panel. Use panel boundaries at discontinuities of f.
pub fn integrate_panels<F: FnMut(f64) -> f64>(f: F, breakpoints: &[f64], n: usize) -> Result<f64> {
    if breakpoints.len() < 2 {
        return Err(invalid("need at least two breakpoints"));
    }
    let rule = GaussLegendre::new(n)?;
    let mut f = f;
    Ok(breakpoints.windows(2).map(|w| rule.integrate(&mut f, w[0], w[1])).sum())
}
