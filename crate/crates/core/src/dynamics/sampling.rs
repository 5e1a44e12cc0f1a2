//! Inverse-CDF sampling from tabulated densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// Deterministic quantiles `(i - 1/2)/n`.
    Quantile,
    /// Inverse CDF of seeded uniforms.
    Pseudorandom,
}

/// Closed interval of tortoise coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidParameter {
                name: "window",
                value: hi - lo,
                reason: "needs finite bounds with hi > lo",
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn nodes(&self, resolution: usize) -> Vec<f64> {
        let n = resolution.max(2);
        (0..n)
            .map(|i| self.lo + self.width() * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Same centre, `factor` times the width.
    pub fn scaled(&self, factor: f64) -> Self {
        let c = 0.5 * (self.lo + self.hi);
        let h = 0.5 * self.width() * factor;
        Self {
            lo: c - h,
            hi: c + h,
        }
    }
}

/// Piecewise-linear CDF of a non-negative density tabulated on increasing nodes.
///
/// Negative density values are clamped to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
    mass: f64,
}

impl GridCdf {
    pub fn new(xs: Vec<f64>, density: &[f64]) -> Result<Self> {
        assert_eq!(xs.len(), density.len());
        let mut cdf = Vec::with_capacity(xs.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..xs.len() {
            acc += 0.5 * (density[i - 1].max(0.0) + density[i].max(0.0)) * (xs[i] - xs[i - 1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::InvalidParameter {
                name: "density mass",
                value: acc,
                reason: "tabulated density must have positive finite mass",
            });
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(Self { xs, cdf, mass: acc })
    }

    /// Unnormalised trapezoid integral of the clamped density.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let w = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let u = u.clamp(0.0, 1.0);
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, n - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        if c1 <= c0 {
            return self.xs[i - 1];
        }
        let w = (u - c0) / (c1 - c0);
        self.xs[i - 1] + w * (self.xs[i] - self.xs[i - 1])
    }
}

/// Uniform variates in `(0, 1)` for the requested strategy.
pub fn uniforms(n: usize, strategy: Sampling, seed: u64) -> Vec<f64> {
    match strategy {
        Sampling::Quantile => (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        Sampling::Pseudorandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
    }
}

/// Second coordinates for 2D sampling: a golden-ratio Kronecker sequence or seeded uniforms.
pub fn secondary_uniforms(n: usize, strategy: Sampling, seed: u64) -> Vec<f64> {
    match strategy {
        Sampling::Quantile => {
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            (0..n).map(|i| (0.5 + i as f64 * phi).fract()).collect()
        }
        Sampling::Pseudorandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
    }
}

/// Cell-wise constant joint density on a square grid of cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCdf {
    window: Window,
    cells: usize,
    /// Marginal CDF over rows at cell edges, length `cells + 1`.
    marginal: Vec<f64>,
    /// Row-wise conditional CDFs at cell edges.
    conditional: Vec<Vec<f64>>,
}

impl JointCdf {
    /// `density[i][j]` is the value in cell `(i, j)`, `i` along the first coordinate.
    pub fn new(window: Window, density: &[Vec<f64>]) -> Result<Self> {
        let cells = density.len();
        let mut marginal = vec![0.0; cells + 1];
        let mut conditional = Vec::with_capacity(cells);
        for (i, row) in density.iter().enumerate() {
            let mut c = vec![0.0; cells + 1];
            for (j, &d) in row.iter().enumerate() {
                c[j + 1] = c[j] + d.max(0.0);
            }
            let row_mass = c[cells];
            if row_mass > 0.0 {
                c.iter_mut().for_each(|v| *v /= row_mass);
            }
            marginal[i + 1] = marginal[i] + row_mass;
            conditional.push(c);
        }
        let total = marginal[cells];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidParameter {
                name: "density mass",
                value: total,
                reason: "tabulated density must have positive finite mass",
            });
        }
        marginal.iter_mut().for_each(|v| *v /= total);
        Ok(Self {
            window,
            cells,
            marginal,
            conditional,
        })
    }

    fn invert(edges: &[f64], u: f64) -> (usize, f64) {
        let n = edges.len() - 1;
        let i = edges.partition_point(|&c| c < u).clamp(1, n) - 1;
        let (c0, c1) = (edges[i], edges[i + 1]);
        let w = if c1 > c0 {
            ((u - c0) / (c1 - c0)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        (i, w)
    }

    /// Maps `(u1, u2)` through the marginal and then the conditional inverse CDF.
    pub fn sample(&self, u1: f64, u2: f64) -> (f64, f64) {
        let dx = self.window.width() / self.cells as f64;
        let (i, w1) = Self::invert(&self.marginal, u1);
        let (j, w2) = Self::invert(&self.conditional[i], u2);
        (
            self.window.lo + (i as f64 + w1) * dx,
            self.window.lo + (j as f64 + w2) * dx,
        )
    }
}
