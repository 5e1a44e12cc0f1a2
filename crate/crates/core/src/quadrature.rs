//! Composite Gauss–Legendre quadrature with panel doubling.
//!
//! Used for the momentum-space integrals, which are smooth Gaussians times a
//! plane-wave phase. Convergence is judged against the L1 norm of the
//! integrand, since oscillatory integrals can be far smaller than the
//! integrand itself.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    pub initial_panels: usize,
    pub max_doublings: u32,
    /// Relative to the integrand's L1 norm.
    pub tolerance: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            order: 16,
            initial_panels: 16,
            max_doublings: 8,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    /// Change between the last two refinements.
    pub change: f64,
    pub l1_norm: f64,
    pub panels: usize,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: QuadConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Integrator {
    pub fn new(cfg: QuadConfig) -> Self {
        let (nodes, weights) = gauss_legendre(cfg.order);
        Self {
            cfg,
            nodes,
            weights,
        }
    }

    pub fn config(&self) -> &QuadConfig {
        &self.cfg
    }

    fn composite<F: Fn(f64) -> Complex64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> (Complex64, f64) {
        let h = (b - a) / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let v = f(mid + 0.5 * h * x);
                sum += v * *w;
                l1 += v.norm() * *w;
            }
        }
        (sum * (0.5 * h), l1 * 0.5 * h)
    }

    /// Integrates `f` over `[a, b]`, doubling panels until successive results
    /// agree to `tolerance * L1`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        let mut panels = self.cfg.initial_panels.max(1);
        let (mut prev, _) = self.composite(&f, a, b, panels);
        let mut change = f64::INFINITY;
        for _ in 0..self.cfg.max_doublings {
            panels *= 2;
            let (cur, l1) = self.composite(&f, a, b, panels);
            change = (cur - prev).norm();
            if change <= self.cfg.tolerance * l1.max(f64::MIN_POSITIVE) {
                return Ok(QuadResult {
                    value: cur,
                    change,
                    l1_norm: l1,
                    panels,
                });
            }
            prev = cur;
        }
        Err(Error::NonConvergence {
            change,
            tolerance: self.cfg.tolerance,
            panels,
        })
    }
}
