//! Closed-form current expressions exactly as they appear in print.
//!
//! Kept apart from the derivation-based currents and used only by the
//! verification audit. The single-photon forms assume the balanced state and
//! are printed without the overall `k0` density factor; the two-photon forms
//! are written in the null coordinates `U_i = t_i - r_i*`, `V_i = t_i + r_i*`.

use std::f64::consts::PI;

use super::{CurrentSample, TwoPhotonCurrents};
use crate::wavefunction::{TwoPhotonEvent, WavepacketSpec};

/// Printed radial cross-term coefficient `J1 = (4 sigma^2 t / k0) sin(2 k0 r*)`.
pub fn printed_j1_coefficient(t: f64, r_star: f64, spec: &WavepacketSpec) -> f64 {
    let s2 = spec.sigma() * spec.sigma();
    4.0 * s2 * t / spec.k0() * (2.0 * spec.k0() * r_star).sin()
}

/// Printed density cross-term coefficient `J0 = cos(2 k0 r*) - (2 sigma^2 t / k0) sin(2 k0 r*)`.
pub fn printed_j0_coefficient(t: f64, r_star: f64, spec: &WavepacketSpec) -> f64 {
    let s2 = spec.sigma() * spec.sigma();
    let phase = 2.0 * spec.k0() * r_star;
    phase.cos() - 2.0 * s2 * t / spec.k0() * phase.sin()
}

/// `rho_(+/-) = exp(-2 (t -/+ r*)^2 sigma^2)`.
pub fn envelope_densities(t: f64, r_star: f64, spec: &WavepacketSpec) -> (f64, f64) {
    let s2 = spec.sigma() * spec.sigma();
    (
        (-2.0 * (t - r_star).powi(2) * s2).exp(),
        (-2.0 * (t + r_star).powi(2) * s2).exp(),
    )
}

/// Printed single-photon `(j0, j1)`, prefactor `sqrt(2/pi) sigma`.
pub fn printed_single(t: f64, r_star: f64, spec: &WavepacketSpec) -> CurrentSample {
    let (rp, rm) = envelope_densities(t, r_star, spec);
    let cross = (rp * rm).sqrt();
    let pre = (2.0 / PI).sqrt() * spec.sigma();
    CurrentSample {
        j0: pre * (rp + rm + printed_j0_coefficient(t, r_star, spec) * cross),
        j1: pre * (rp - rm + printed_j1_coefficient(t, r_star, spec) * cross),
    }
}

/// Printed two-photon densities and currents at general two-time arguments.
pub fn printed_two(ev: &TwoPhotonEvent, spec: &WavepacketSpec) -> TwoPhotonCurrents {
    let (k0, s2) = (spec.k0(), spec.sigma() * spec.sigma());
    let (u1, v1) = (ev.first.retarded(), ev.first.advanced());
    let (u2, v2) = (ev.second.retarded(), ev.second.advanced());
    let pre = 2.0 * s2 * k0 / PI;
    let direct = (-2.0 * s2 * (v2 * v2 + u1 * u1)).exp();
    let exchanged = (-2.0 * s2 * (v1 * v1 + u2 * u2)).exp();
    let overlap = (-(v1 * v1 + v2 * v2) * s2 - (u1 * u1 + u2 * u2) * s2).exp();
    let density_phase = k0 * (u1 - u2 - v1 + v2);
    let current_phase = k0 * (v1 - v2 - u1 + u2);
    let slope = 2.0 * s2 / k0;

    let j1_0 = pre
        * (exchanged
            + direct
            + 2.0 * overlap * density_phase.cos()
            + slope * overlap * (v1 - u1) * density_phase.sin());
    let j2_0 = pre
        * (direct + exchanged + 2.0 * overlap * density_phase.cos()
            - slope * overlap * (v2 - u2) * density_phase.sin());
    let j1_1 = pre * (direct - exchanged + slope * overlap * (v1 + u1) * current_phase.sin());
    let j2_1 = pre * (exchanged - direct - slope * overlap * (v2 + u2) * current_phase.sin());
    TwoPhotonCurrents {
        j1_0,
        j1_1,
        j2_0,
        j2_1,
    }
}
