//! Principal branch of the Lambert W function.

use crate::error::{Error, Result};

const INV_E: f64 = 0.367_879_441_171_442_33;

/// `W0(x)` with `w * exp(w) = x`, for `x >= -1/e`.
///
/// Halley iteration from a branch-point series near `-1/e`, a Padé-like
/// guess around the origin and the asymptotic `ln x - ln ln x` for large `x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E {
        return Err(Error::Domain {
            quantity: "x",
            value: x,
            domain: "x >= -1/e".into(),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x == -INV_E {
        return Ok(-1.0);
    }
    if x > 1e300 {
        // w e^w overflows before converging; the log form is well conditioned.
        return Ok(w0_of_exp(x.ln()));
    }

    let mut w = initial_guess(x);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.32 {
        // Series in p = sqrt(2(e x + 1)) about the branch point.
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        let l = (1.0 + x).ln();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// `W0(exp(z))`, i.e. the positive root `w` of `w + ln w = z`.
///
/// Stays accurate when `exp(z)` would overflow or underflow, which is what the
/// tortoise inverse needs far from and close to the horizon.
pub fn w0_of_exp(z: f64) -> f64 {
    if z == f64::INFINITY {
        return f64::INFINITY;
    }
    // Newton on y = ln w for y + e^y = z; convex and increasing, so it converges from any start.
    let mut y = if z < 1.0 { z } else { (z - z.ln()).ln() };
    for _ in 0..64 {
        let e = y.exp();
        let step = (y + e - z) / (1.0 + e);
        y -= step;
        if step.abs() <= 2.0 * f64::EPSILON * y.abs().max(1.0) {
            break;
        }
    }
    y.exp()
}
