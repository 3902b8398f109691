//! Fixed-order quadrature over a wavelength band.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::radiometry::Band;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    GaussLegendre,
    Midpoint,
}

/// Quadrature rule on the reference interval [−1, 1], built once and
/// shared by every integration that uses the config.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    scheme: QuadratureScheme,
    nodes: Arc<[(f64, f64)]>,
}

impl PartialEq for QuadratureConfig {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.nodes.len() == other.nodes.len()
    }
}

pub const MIN_NODES: usize = 8;
pub const DEFAULT_NODES: usize = 64;

impl QuadratureConfig {
    pub fn new(scheme: QuadratureScheme, node_count: usize) -> Result<Self> {
        if node_count < MIN_NODES {
            return Err(Error::domain(format!(
                "quadrature needs at least {MIN_NODES} nodes, got {node_count}"
            )));
        }
        let nodes: Vec<(f64, f64)> = match scheme {
            QuadratureScheme::GaussLegendre => gauss_legendre_rule(node_count),
            QuadratureScheme::Midpoint => {
                let w = 2.0 / node_count as f64;
                (0..node_count)
                    .map(|i| (-1.0 + (i as f64 + 0.5) * w, w))
                    .collect()
            }
        };
        Ok(QuadratureConfig {
            scheme,
            nodes: nodes.into(),
        })
    }

    pub fn gauss_legendre(node_count: usize) -> Result<Self> {
        Self::new(QuadratureScheme::GaussLegendre, node_count)
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[lo, hi]`, ascending.
    pub fn interval_nodes(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    /// Nodes (μm) and weights mapped onto `band`, ascending.
    pub fn band_nodes(&self, band: &Band) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.interval_nodes(band.lo(), band.hi())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::gauss_legendre(DEFAULT_NODES).expect("default node count is valid")
    }
}

/// Integrates `f` over `band` with the configured rule.
pub fn integrate_band<F>(f: F, band: &Band, q: &QuadratureConfig) -> f64
where
    F: Fn(f64) -> f64,
{
    q.band_nodes(band).map(|(x, w)| w * f(x)).sum()
}

/// Integrates `f` over an arbitrary finite interval `[lo, hi]`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::domain(format!(
            "integration interval must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    Ok(q.interval_nodes(lo, hi).map(|(x, w)| w * f(x)).sum())
}

/// Gauss-Legendre nodes and weights on [−1, 1], ascending.
///
/// Newton iteration on P_n from the Tricomi initial guess; the three-term
/// recurrence gives P_n and P_{n-1}, and the weight is
/// 2 / ((1 − x²) P_n'(x)²).
fn gauss_legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
