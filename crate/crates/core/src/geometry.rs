//! Schwarzschild radial geometry and the Schwarzschild–Alcubierre guiding metric.
//!
//! Only the `(t, r)` block of the line element enters radial dynamics. Units are
//! geometric (`G = c = 1`) and every radial evaluation is restricted to the
//! exterior `r > 2m`. For `m = 0` there is no horizon and `r` is treated as a
//! flat line coordinate, so any finite value is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::w0_of_exp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeParams {
    mass: f64,
}

impl SpacetimeParams {
    pub fn new(mass: f64) -> Result<Self> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: mass,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self { mass })
    }

    pub fn flat() -> Self {
        Self { mass: 0.0 }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Horizon radius `2m`.
    pub fn horizon(&self) -> f64 {
        2.0 * self.mass
    }

    fn check_exterior(&self, r: f64) -> Result<()> {
        let ok = r.is_finite() && (self.mass == 0.0 || r > self.horizon());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                quantity: "r",
                value: r,
                domain: format!("r > 2m = {}", self.horizon()),
            })
        }
    }
}

impl Default for SpacetimeParams {
    fn default() -> Self {
        Self { mass: 1.0 }
    }
}

/// `f(r) = 1 - 2m/r`.
pub fn metric_function(r: f64, params: &SpacetimeParams) -> Result<f64> {
    params.check_exterior(r)?;
    if params.mass == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - params.horizon() / r)
}

/// `r* = r + 2m ln(r/2m - 1)`.
pub fn tortoise_from_radial(r: f64, params: &SpacetimeParams) -> Result<f64> {
    params.check_exterior(r)?;
    if params.mass == 0.0 {
        return Ok(r);
    }
    let rs = params.horizon();
    Ok(r + rs * ((r - rs) / rs).ln())
}

/// Inverse tortoise map on the exterior branch, `r = 2m (1 + W0(exp(r*/2m - 1)))`.
pub fn radial_from_tortoise(r_star: f64, params: &SpacetimeParams) -> f64 {
    if params.mass == 0.0 {
        return r_star;
    }
    let rs = params.horizon();
    rs * (1.0 + w0_of_exp(r_star / rs - 1.0))
}

/// An event in the radial plane, carrying both radial coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialEvent {
    pub t: f64,
    pub r: f64,
    pub r_star: f64,
}

impl RadialEvent {
    pub fn from_tortoise(t: f64, r_star: f64, params: &SpacetimeParams) -> Self {
        Self {
            t,
            r: radial_from_tortoise(r_star, params),
            r_star,
        }
    }

    pub fn from_radial(t: f64, r: f64, params: &SpacetimeParams) -> Result<Self> {
        Ok(Self {
            t,
            r,
            r_star: tortoise_from_radial(r, params)?,
        })
    }
}

/// The `(t, r)` block of a 2D metric together with the shift scalar that built it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComponents {
    pub g_tt: f64,
    pub g_rr: f64,
    pub g_tr: f64,
    pub v_s: f64,
}

impl MetricComponents {
    pub fn schwarzschild(r: f64, params: &SpacetimeParams) -> Result<Self> {
        let f = metric_function(r, params)?;
        Ok(Self {
            g_tt: -f,
            g_rr: 1.0 / f,
            g_tr: 0.0,
            v_s: 0.0,
        })
    }

    pub fn determinant(&self) -> f64 {
        self.g_tt * self.g_rr - self.g_tr * self.g_tr
    }

    /// Line element `g_tt + 2 g_tr x + g_rr x^2` for the coordinate velocity `x = dr/dt`.
    pub fn interval(&self, dr_dt: f64) -> f64 {
        self.g_tt + 2.0 * self.g_tr * dr_dt + self.g_rr * dr_dt * dr_dt
    }

    /// `g^{mu nu} a_mu b_nu` for covectors on the 2D block.
    fn inverse_product(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        let det = self.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularMetric { determinant: det });
        }
        let (inv_tt, inv_rr, inv_tr) = (self.g_rr / det, self.g_tt / det, -self.g_tr / det);
        Ok(inv_tt * a[0] * b[0] + inv_rr * a[1] * b[1] + inv_tr * (a[0] * b[1] + a[1] * b[0]))
    }
}

/// Schwarzschild–Alcubierre block `(-(1 - v_s^2) f, 1/f, -v_s)`.
pub fn warp_metric(v_s: f64, r: f64, params: &SpacetimeParams) -> Result<MetricComponents> {
    let f = metric_function(r, params)?;
    Ok(MetricComponents {
        g_tt: -(1.0 - v_s * v_s) * f,
        g_rr: 1.0 / f,
        g_tr: -v_s,
        v_s,
    })
}

/// Warp construction `g = (1 - lapse^2 + <b,b>) u u - u b - b u + g_base` on the 2D block.
///
/// `u` and `b` are covectors, `<b,b>` uses the inverse of `base`. The returned
/// `v_s` is read off the cross term as `-g_tr`.
pub fn adm_warp_general(
    u: [f64; 2],
    b: [f64; 2],
    lapse: f64,
    base: &MetricComponents,
) -> Result<MetricComponents> {
    let bb = base.inverse_product(b, b)?;
    let scale = 1.0 - lapse * lapse + bb;
    let g_tt = scale * u[0] * u[0] - 2.0 * u[0] * b[0] + base.g_tt;
    let g_tr = scale * u[0] * u[1] - u[0] * b[1] - u[1] * b[0] + base.g_tr;
    let g_rr = scale * u[1] * u[1] - 2.0 * u[1] * b[1] + base.g_rr;
    Ok(MetricComponents {
        g_tt,
        g_rr,
        g_tr,
        v_s: -g_tr,
    })
}

/// `<b,b>` of a covector against the inverse of `base`.
pub fn shift_norm(b: [f64; 2], base: &MetricComponents) -> Result<f64> {
    base.inverse_product(b, b)
}

/// Both null roots `dr/dt` of `g_tt + 2 g_tr x + g_rr x^2 = 0`, larger first.
///
/// For the warp block these are `f (v_s + 1)` and `f (v_s - 1)`.
pub fn null_velocity_roots(c: &MetricComponents) -> (f64, f64) {
    let (a, b, cc) = (c.g_rr, 2.0 * c.g_tr, c.g_tt);
    let disc = (b * b - 4.0 * a * cc).max(0.0).sqrt();
    let q = if b >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    let (x1, x2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / a, cc / q)
    };
    if x1 >= x2 {
        (x1, x2)
    } else {
        (x2, x1)
    }
}

/// Sign convention of the guiding metric: `+1` for a non-negative ratio, `-1` otherwise.
pub fn ratio_sign(ratio: f64) -> f64 {
    if ratio >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Shift scalar `v_s = (|rho| - 1) sgn(rho)` for a current ratio `rho = j1/j0`.
pub fn shift_from_ratio(ratio: f64) -> f64 {
    (ratio.abs() - 1.0) * ratio_sign(ratio)
}

/// Coordinate velocity `dr/dt` of the null ray of the guiding metric selected by `sgn(rho)`.
pub fn guiding_null_velocity(ratio: f64, r: f64, params: &SpacetimeParams) -> Result<f64> {
    let metric = warp_metric(shift_from_ratio(ratio), r, params)?;
    let (future_out, future_in) = null_velocity_roots(&metric);
    Ok(if ratio >= 0.0 { future_out } else { future_in })
}
