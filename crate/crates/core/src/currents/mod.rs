//! Klein-Gordon conserved currents and the velocity fields built from them.
//!
//! Conventions: `j0 = -2 Im(psi* d_t psi)` (density, positive for
//! positive-frequency packets) and `j1 = +2 Im(psi* d_r* psi)`. The flow in
//! tortoise coordinates is `dr*/dt = j1/j0`; the Schwarzschild coordinate
//! velocity is `f(r)` times that.

pub mod printed;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{metric_function, tortoise_from_radial, SpacetimeParams};
use crate::wavefunction::{
    psi_single, psi_single_gradient, two_photon_gradient, two_photon_psi, TwoPhotonEvent,
    WavepacketSpec,
};

/// Relative node floor applied to the grid maximum of `j0`.
pub const DEFAULT_NODE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentSample {
    pub j0: f64,
    pub j1: f64,
}

impl CurrentSample {
    pub fn from_amplitude(psi: Complex64, d_t: Complex64, d_r: Complex64) -> Self {
        Self {
            j0: -2.0 * (psi.conj() * d_t).im,
            j1: 2.0 * (psi.conj() * d_r).im,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.j1 / self.j0
    }

    /// `j1/j0`, or a node error when `|j0|` is below `floor`.
    pub fn checked_ratio(&self, t: f64, r_star: f64, floor: f64) -> Result<f64> {
        if !(self.j0.abs() >= floor) || self.j0 == 0.0 {
            return Err(Error::NodeProximity {
                t,
                r_star,
                density: self.j0,
                floor,
            });
        }
        Ok(self.j1 / self.j0)
    }
}

pub fn single_current(t: f64, r_star: f64, spec: &WavepacketSpec) -> CurrentSample {
    let psi = psi_single(t, r_star, spec);
    let (dt, dr) = psi_single_gradient(t, r_star, spec);
    CurrentSample::from_amplitude(psi, dt, dr)
}

/// `dr*/dt = j1/j0` of the single-photon flow.
pub fn tortoise_velocity_single(
    t: f64,
    r_star: f64,
    spec: &WavepacketSpec,
    node_floor: f64,
) -> Result<f64> {
    single_current(t, r_star, spec).checked_ratio(t, r_star, node_floor)
}

/// Schwarzschild coordinate velocity `dr/dt = f(r) j1/j0`.
pub fn velocity_single(
    t: f64,
    r: f64,
    params: &SpacetimeParams,
    spec: &WavepacketSpec,
    node_floor: f64,
) -> Result<f64> {
    let f = metric_function(r, params)?;
    let r_star = tortoise_from_radial(r, params)?;
    Ok(f * tortoise_velocity_single(t, r_star, spec, node_floor)?)
}

/// Currents of both photons of the symmetrised two-photon amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonCurrents {
    pub j1_0: f64,
    pub j1_1: f64,
    pub j2_0: f64,
    pub j2_1: f64,
}

impl TwoPhotonCurrents {
    pub fn first(&self) -> CurrentSample {
        CurrentSample {
            j0: self.j1_0,
            j1: self.j1_1,
        }
    }

    pub fn second(&self) -> CurrentSample {
        CurrentSample {
            j0: self.j2_0,
            j1: self.j2_1,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.j1_0, self.j1_1, self.j2_0, self.j2_1]
    }
}

/// Currents at general two-time arguments `(t1, r1*)`, `(t2, r2*)`.
pub fn two_photon_currents(ev: &TwoPhotonEvent, spec: &WavepacketSpec) -> TwoPhotonCurrents {
    let psi = two_photon_psi(ev, spec);
    let [d_t1, d_r1, d_t2, d_r2] = two_photon_gradient(ev, spec);
    let first = CurrentSample::from_amplitude(psi, d_t1, d_r1);
    let second = CurrentSample::from_amplitude(psi, d_t2, d_r2);
    TwoPhotonCurrents {
        j1_0: first.j0,
        j1_1: first.j1,
        j2_0: second.j0,
        j2_1: second.j1,
    }
}

/// `(dr1*/dt, dr2*/dt)` on the common timeslice `t`.
pub fn tortoise_velocity_two(
    t: f64,
    r1_star: f64,
    r2_star: f64,
    spec: &WavepacketSpec,
    node_floor: f64,
) -> Result<(f64, f64)> {
    let c = two_photon_currents(&TwoPhotonEvent::equal_time(t, r1_star, r2_star), spec);
    Ok((
        c.first().checked_ratio(t, r1_star, node_floor)?,
        c.second().checked_ratio(t, r2_star, node_floor)?,
    ))
}

/// Schwarzschild coordinate velocities `(f(r1) j1^1/j1^0, f(r2) j2^1/j2^0)` at equal times.
pub fn velocity_two(
    t: f64,
    r1: f64,
    r2: f64,
    params: &SpacetimeParams,
    spec: &WavepacketSpec,
    node_floor: f64,
) -> Result<(f64, f64)> {
    let (f1, f2) = (metric_function(r1, params)?, metric_function(r2, params)?);
    let (s1, s2) = (
        tortoise_from_radial(r1, params)?,
        tortoise_from_radial(r2, params)?,
    );
    let (w1, w2) = tortoise_velocity_two(t, s1, s2, spec, node_floor)?;
    Ok((f1 * w1, f2 * w2))
}

/// Central-difference estimate of `d_t j0 + d_r* j1` for the single photon.
pub fn continuity_residual(t: f64, r_star: f64, spec: &WavepacketSpec, h: f64) -> f64 {
    let dj0 = single_current(t + h, r_star, spec).j0 - single_current(t - h, r_star, spec).j0;
    let dj1 = single_current(t, r_star + h, spec).j1 - single_current(t, r_star - h, spec).j1;
    (dj0 + dj1) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Photon {
    First,
    Second,
}

/// Continuity residual of one photon's current in its own `(t_i, r_i*)`, the other event held fixed.
pub fn continuity_residual_two(
    ev: &TwoPhotonEvent,
    photon: Photon,
    spec: &WavepacketSpec,
    h: f64,
) -> f64 {
    let moved = |dt: f64, dr: f64| {
        let mut e = *ev;
        let p = match photon {
            Photon::First => &mut e.first,
            Photon::Second => &mut e.second,
        };
        p.t += dt;
        p.r_star += dr;
        let c = two_photon_currents(&e, spec);
        match photon {
            Photon::First => c.first(),
            Photon::Second => c.second(),
        }
    };
    let dj0 = moved(h, 0.0).j0 - moved(-h, 0.0).j0;
    let dj1 = moved(0.0, h).j1 - moved(0.0, -h).j1;
    (dj0 + dj1) / (2.0 * h)
}
