//! Dormand-Prince 5(4) with FSAL, step-size control and 4th-order dense output.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeTolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Consecutive step halvings allowed when the right-hand side refuses a stage.
    pub max_bisections: u32,
    pub max_steps: usize,
}

impl Default for OdeTolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_bisections: 40,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeStop {
    Completed,
    /// The field failed at every bisected stage, or the step size collapsed.
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<const N: usize> {
    /// States at the requested output times reached before stopping.
    pub samples: Vec<(f64, [f64; N])>,
    pub stop: OdeStop,
    pub t_end: f64,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        *o += h * s;
    }
    out
}

struct Step<const N: usize> {
    y_new: [f64; N],
    k7: [f64; N],
    err: f64,
    cont: [[f64; N]; 5],
}

fn attempt<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: &OdeTolerances,
) -> Result<Step<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(
        t + C4 * h,
        &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = f(
        t + C5 * h,
        &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &comb(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y_new = comb(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(t + h, &y_new)?;

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / N as f64).sqrt();

    let mut cont = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        cont[0][i] = y[i];
        cont[1][i] = dy;
        cont[2][i] = bspl;
        cont[3][i] = dy - h * k7[i] - bspl;
        cont[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Step {
        y_new,
        k7,
        err,
        cont,
    })
}

fn interpolate<const N: usize>(cont: &[[f64; N]; 5], theta: f64) -> [f64; N] {
    let s = 1.0 - theta;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = cont[0][i]
            + theta * (cont[1][i] + s * (cont[2][i] + theta * (cont[3][i] + s * cont[4][i])));
    }
    out
}

/// Integrates `y' = f(t, y)` forward from `t0` to the last of `outputs`.
///
/// `outputs` must be sorted, start at or after `t0`, and are reported through
/// the dense interpolant.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    tol: &OdeTolerances,
) -> OdeSolution<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut sol = OdeSolution {
        samples: Vec::with_capacity(outputs.len()),
        stop: OdeStop::Completed,
        t_end: t0,
        accepted: 0,
        rejected: 0,
    };
    let Some(&t1) = outputs.last() else {
        return sol;
    };
    let mut next = 0;
    while next < outputs.len() && outputs[next] <= t0 {
        sol.samples.push((outputs[next], y0));
        next += 1;
    }
    if next == outputs.len() {
        return sol;
    }
    let mut k1 = match f(t0, &y0) {
        Ok(k) => k,
        Err(_) => {
            sol.stop = OdeStop::Aborted;
            return sol;
        }
    };
    let span = t1 - t0;
    let mut h = (span * 1e-3).min(span);
    let (mut t, mut y) = (t0, y0);
    let mut halvings = 0;
    while t < t1 {
        if sol.accepted + sol.rejected >= tol.max_steps || h <= 1e-14 * t.abs().max(1.0) {
            sol.stop = OdeStop::Aborted;
            break;
        }
        let h_try = h.min(t1 - t);
        match attempt(&mut f, t, &y, &k1, h_try, tol) {
            Err(_) => {
                halvings += 1;
                if halvings > tol.max_bisections {
                    sol.stop = OdeStop::Aborted;
                    break;
                }
                h = 0.5 * h_try;
            }
            Ok(step) if step.err <= 1.0 => {
                halvings = 0;
                let t_new = if h_try == t1 - t { t1 } else { t + h_try };
                while next < outputs.len() && outputs[next] <= t_new {
                    let theta = (outputs[next] - t) / h_try;
                    let y_out = if outputs[next] == t_new {
                        step.y_new
                    } else {
                        interpolate(&step.cont, theta)
                    };
                    sol.samples.push((outputs[next], y_out));
                    next += 1;
                }
                t = t_new;
                y = step.y_new;
                k1 = step.k7;
                sol.accepted += 1;
                let fac = if step.err == 0.0 {
                    5.0
                } else {
                    (0.9 * step.err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = h_try * fac;
            }
            Ok(step) => {
                halvings = 0;
                sol.rejected += 1;
                h = h_try * (0.9 * step.err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
    }
    sol.t_end = t;
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn times(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn exponential_decay() {
        let out = times(0.0, 5.0, 11);
        let sol = integrate(
            |_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            &out,
            &OdeTolerances::default(),
        );
        assert_eq!(sol.stop, OdeStop::Completed);
        assert_eq!(sol.samples.len(), 11);
        for (t, y) in sol.samples {
            assert!((y[0] - (-t).exp()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let out = times(0.0, 10.0, 97);
        let sol = integrate(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            &out,
            &OdeTolerances::default(),
        );
        for (t, y) in sol.samples {
            assert!((y[0] - t.sin()).abs() < 1e-8, "t = {t}: {}", y[0] - t.sin());
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_velocity_is_exact() {
        let out = times(-2.0, 3.0, 6);
        let sol = integrate(
            |_, _: &[f64; 1]| Ok([1.0]),
            -2.0,
            [0.25],
            &out,
            &OdeTolerances::default(),
        );
        for (t, y) in sol.samples {
            assert!((y[0] - (0.25 + t + 2.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn refusing_field_aborts() {
        let out = times(0.0, 2.0, 5);
        let sol = integrate(
            |t, y: &[f64; 1]| {
                if t > 1.0 {
                    Err(Error::NodeProximity {
                        t,
                        r_star: y[0],
                        density: 0.0,
                        floor: 1.0,
                    })
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            &out,
            &OdeTolerances::default(),
        );
        assert_eq!(sol.stop, OdeStop::Aborted);
        assert!(sol.t_end <= 1.0 && sol.t_end > 0.99);
        assert!((2..=3).contains(&sol.samples.len()));
    }

    #[test]
    fn outputs_at_start_are_initial_state() {
        let sol = integrate(
            |_, _: &[f64; 1]| Ok([2.0]),
            1.0,
            [3.0],
            &[1.0],
            &OdeTolerances::default(),
        );
        assert_eq!(sol.samples, vec![(1.0, [3.0])]);
    }
}
