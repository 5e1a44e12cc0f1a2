//! Weak values of momentum and energy under position post-selection.
//!
//! Everything is kept as amplitude products: for a post-selected amplitude
//! `psi = <phi|psi>` and operator amplitude `X = <phi|X|psi>` the weighted
//! numerator is `Re(psi* X)` and the weak value is that over `|psi|^2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Integrator;
use crate::wavefunction::{
    momentum_profile, two_photon_components, two_photon_components_quadrature, Branch,
    TwoPhotonComponents, TwoPhotonEvent, WavepacketSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValuePair {
    pub p_w: f64,
    pub h_w: f64,
    /// `Re(psi* <phi|p|psi>)`.
    pub p_num: f64,
    /// `Re(psi* <phi|H|psi>)`.
    pub h_num: f64,
    /// Post-selection probability `|<phi|psi>|^2`.
    pub density: f64,
}

impl WeakValuePair {
    /// Builds the pair from the post-selected amplitudes.
    pub fn from_amplitudes(psi: Complex64, p_amp: Complex64, h_amp: Complex64) -> Self {
        let density = psi.norm_sqr();
        let p_num = (psi.conj() * p_amp).re;
        let h_num = (psi.conj() * h_amp).re;
        Self {
            p_w: p_num / density,
            h_w: h_num / density,
            p_num,
            h_num,
            density,
        }
    }

    /// `p_w / H_w` from the weighted numerators, finite even where `density` vanishes.
    pub fn ratio(&self) -> f64 {
        self.p_num / self.h_num
    }

    fn checked(self, t: f64, r_star: f64, floor: f64) -> Result<Self> {
        if !(self.density >= floor) || self.density == 0.0 {
            return Err(Error::NodeProximity {
                t,
                r_star,
                density: self.density,
                floor,
            });
        }
        Ok(self)
    }
}

/// Where the post-selection projects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PostselectionSpec {
    SinglePosition {
        r_star: f64,
    },
    /// Symmetrised coincidence on the common timeslice.
    Coincidence {
        r1_star: f64,
        r2_star: f64,
    },
}

impl PostselectionSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "coordinate must be finite",
                })
            }
        };
        match *self {
            Self::SinglePosition { r_star } => check("r_star", r_star),
            Self::Coincidence { r1_star, r2_star } => {
                check("r1_star", r1_star)?;
                check("r2_star", r2_star)
            }
        }
    }
}

/// Integration windows of both branches, each split at `k = 0` where needed.
fn branch_windows(spec: &WavepacketSpec) -> Vec<(Branch, f64, f64)> {
    let (a, b) = spec.support();
    let mut out = Vec::with_capacity(4);
    for (branch, lo, hi) in [(Branch::Outgoing, a, b), (Branch::Ingoing, -b, -a)] {
        if lo < 0.0 && hi > 0.0 {
            out.push((branch, lo, 0.0));
            out.push((branch, 0.0, hi));
        } else {
            out.push((branch, lo, hi));
        }
    }
    out
}

/// Amplitude, momentum and energy integrals `int dk/sqrt(2 pi) {1, k, |k|} f(k) exp(-i|k|t + i k r*)`.
pub fn single_amplitudes(
    t: f64,
    r_star: f64,
    spec: &WavepacketSpec,
    integrator: &Integrator,
) -> Result<[Complex64; 3]> {
    let (wo, wi) = spec.weights();
    let mut acc = [Complex64::default(); 3];
    for (branch, lo, hi) in branch_windows(spec) {
        let w = match branch {
            Branch::Outgoing => wo,
            Branch::Ingoing => wi,
        };
        if w == 0.0 {
            continue;
        }
        let base = |k: f64| {
            w * momentum_profile(k, branch, spec)
                * Complex64::new(0.0, -k.abs() * t + k * r_star).exp()
        };
        acc[0] += integrator.integrate(base, lo, hi)?.value;
        acc[1] += integrator.integrate(|k| base(k) * k, lo, hi)?.value;
        acc[2] += integrator.integrate(|k| base(k) * k.abs(), lo, hi)?.value;
    }
    let norm = 1.0 / (2.0 * PI).sqrt();
    Ok(acc.map(|z| z * norm))
}

/// Single-photon weak momentum and energy at `(t, r*)`.
pub fn weak_single(
    t: f64,
    r_star: f64,
    spec: &WavepacketSpec,
    integrator: &Integrator,
    node_floor: f64,
) -> Result<WeakValuePair> {
    PostselectionSpec::SinglePosition { r_star }.validate()?;
    let [psi, p, h] = single_amplitudes(t, r_star, spec, integrator)?;
    WeakValuePair::from_amplitudes(psi, p, h).checked(t, r_star, node_floor)
}

/// How the two-photon single-particle factors are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentSource {
    Analytic,
    Quadrature,
}

/// Post-selected amplitudes of the coincidence state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceAmplitudes {
    pub psi: Complex64,
    pub p_a: Complex64,
    pub h_a: Complex64,
    pub p_b: Complex64,
    pub h_b: Complex64,
}

impl CoincidenceAmplitudes {
    pub fn from_components(c: &TwoPhotonComponents) -> Self {
        let s = FRAC_1_SQRT_2;
        let (g1, g2, k1, k2) = (c.psi1, c.psi2, c.psi1k, c.psi2k);
        Self {
            psi: (g1[0] * g2[1] + g1[1] * g2[0]) * s,
            p_a: (k1[0] * g2[1] - g1[1] * k2[0]) * s,
            h_a: (k1[0] * g2[1] + g1[1] * k2[0]) * s,
            p_b: (k1[1] * g2[0] - g1[0] * k2[1]) * s,
            h_b: (k1[1] * g2[0] + g1[0] * k2[1]) * s,
        }
    }

    /// `2 Re(psi* X)` for `H_A, p_A, H_B, p_B`, ordered like the two-photon currents.
    pub fn current_forms(&self) -> [f64; 4] {
        let f = |x: Complex64| 2.0 * (self.psi.conj() * x).re;
        [f(self.h_a), f(self.p_a), f(self.h_b), f(self.p_b)]
    }
}

pub fn coincidence_amplitudes(
    ev: &TwoPhotonEvent,
    spec: &WavepacketSpec,
    source: ComponentSource,
    integrator: &Integrator,
) -> Result<CoincidenceAmplitudes> {
    let c = match source {
        ComponentSource::Analytic => two_photon_components(ev, spec),
        ComponentSource::Quadrature => two_photon_components_quadrature(ev, spec, integrator)?,
    };
    Ok(CoincidenceAmplitudes::from_components(&c))
}

/// Weak values at detectors `A` (first event) and `B` (second event).
pub fn weak_two(
    ev: &TwoPhotonEvent,
    spec: &WavepacketSpec,
    source: ComponentSource,
    integrator: &Integrator,
    node_floor: f64,
) -> Result<(WeakValuePair, WeakValuePair)> {
    let t = ev.first.t;
    if ev.second.t != t {
        return Err(Error::InvalidParameter {
            name: "t2",
            value: ev.second.t,
            reason: "coincidence post-selection needs both events on one timeslice",
        });
    }
    PostselectionSpec::Coincidence {
        r1_star: ev.first.r_star,
        r2_star: ev.second.r_star,
    }
    .validate()?;
    let a = coincidence_amplitudes(ev, spec, source, integrator)?;
    let pa = WeakValuePair::from_amplitudes(a.psi, a.p_a, a.h_a).checked(
        t,
        ev.first.r_star,
        node_floor,
    )?;
    let pb = WeakValuePair::from_amplitudes(a.psi, a.p_b, a.h_b).checked(
        t,
        ev.second.r_star,
        node_floor,
    )?;
    Ok((pa, pb))
}
