//! Radial wavefunctions in the optical approximation.
//!
//! All spatial arguments are tortoise coordinates. Position-space amplitudes
//! use the momentum measure `dk / sqrt(2 pi)`, which is the normalisation that
//! produces the `(2 sigma^2 / pi)^{1/4}` prefactor of the closed forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadialEvent;
use crate::quadrature::Integrator;

pub type ComplexAmplitude = Complex64;

/// Below this `k0/sigma` the plane-wave reduction is no longer trustworthy.
pub const NARROWBAND_WARNING_RATIO: f64 = 5.0;

/// Half-width of the momentum window, in units of sigma.
pub const SUPPORT_HALF_WIDTH: f64 = 10.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    k0: f64,
    sigma: f64,
    alpha: f64,
}

impl WavepacketSpec {
    pub fn new(k0: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if !(k0.is_finite() && k0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "k0",
                value: k0,
                reason: "must be finite and > 0",
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                value: sigma,
                reason: "must be finite and > 0",
            });
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must lie in [0, 1]",
            });
        }
        if k0 / sigma < NARROWBAND_WARNING_RATIO {
            log::warn!(
                "k0/sigma = {} is below {NARROWBAND_WARNING_RATIO}; the optical approximation is poor",
                k0 / sigma
            );
        }
        Ok(Self { k0, sigma, alpha })
    }

    pub fn from_ratio(k0_over_sigma: f64, sigma: f64, alpha: f64) -> Result<Self> {
        Self::new(k0_over_sigma * sigma, sigma, alpha)
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k0_over_sigma(&self) -> f64 {
        self.k0 / self.sigma
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.k0, self.sigma, alpha)
    }

    /// Weights `(sqrt(alpha), sqrt(1 - alpha))` of the outgoing and ingoing packets.
    pub fn weights(&self) -> (f64, f64) {
        (self.alpha.sqrt(), (1.0 - self.alpha).sqrt())
    }

    /// Position-space peak amplitude `(2 sigma^2 / pi)^{1/4}` of one packet.
    pub fn envelope_peak(&self) -> f64 {
        (2.0 * self.sigma * self.sigma / PI).powf(0.25)
    }

    /// Momentum window `[k0 - 10 sigma, k0 + 10 sigma]` of the outgoing profile.
    pub fn support(&self) -> (f64, f64) {
        (
            self.k0 - SUPPORT_HALF_WIDTH * self.sigma,
            self.k0 + SUPPORT_HALF_WIDTH * self.sigma,
        )
    }

    /// Probability weight of one profile on the wrong side of `k = 0`.
    pub fn negative_frequency_weight(&self) -> f64 {
        0.5 * statrs::function::erf::erfc(self.k0 / (std::f64::consts::SQRT_2 * self.sigma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Peaked at `+k0`, moving toward larger `r*`.
    Outgoing,
    /// Peaked at `-k0`.
    Ingoing,
}

/// Gaussian momentum profile `f_(+/-)(k)`.
pub fn momentum_profile(k: f64, branch: Branch, spec: &WavepacketSpec) -> f64 {
    let centre = match branch {
        Branch::Outgoing => spec.k0,
        Branch::Ingoing => -spec.k0,
    };
    let s2 = spec.sigma * spec.sigma;
    (2.0 * PI * s2).powf(-0.25) * (-(k - centre).powi(2) / (4.0 * s2)).exp()
}

/// A point of the `(t, r*)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub r_star: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, r_star: f64) -> Self {
        Self { t, r_star }
    }

    /// Outgoing null coordinate `U = t - r*`.
    pub fn retarded(&self) -> f64 {
        self.t - self.r_star
    }

    /// Ingoing null coordinate `V = t + r*`.
    pub fn advanced(&self) -> f64 {
        self.t + self.r_star
    }
}

impl From<RadialEvent> for SpacetimePoint {
    fn from(e: RadialEvent) -> Self {
        Self {
            t: e.t,
            r_star: e.r_star,
        }
    }
}

/// Single packet in one null coordinate: `N exp(-w (i k0 + w sigma^2))`.
fn packet(w: f64, spec: &WavepacketSpec) -> Complex64 {
    let s2 = spec.sigma * spec.sigma;
    Complex64::new(-w * w * s2, -w * spec.k0).exp() * spec.envelope_peak()
}

/// Derivative factor `-(i k0 + 2 w sigma^2)` of [`packet`] with respect to `w`.
fn packet_log_derivative(w: f64, spec: &WavepacketSpec) -> Complex64 {
    -Complex64::new(2.0 * w * spec.sigma * spec.sigma, spec.k0)
}

/// Outgoing single-particle amplitude `psi_1(t, r*)`.
pub fn outgoing(t: f64, r_star: f64, spec: &WavepacketSpec) -> Complex64 {
    packet(t - r_star, spec)
}

/// Ingoing single-particle amplitude `psi_2(t, r*)`.
pub fn ingoing(t: f64, r_star: f64, spec: &WavepacketSpec) -> Complex64 {
    packet(t + r_star, spec)
}

/// Closed-form single-photon amplitude for the `alpha`-weighted superposition.
pub fn psi_single(t: f64, r_star: f64, spec: &WavepacketSpec) -> ComplexAmplitude {
    let (wo, wi) = spec.weights();
    outgoing(t, r_star, spec) * wo + ingoing(t, r_star, spec) * wi
}

/// Analytic `(d/dt psi, d/dr* psi)`.
pub fn psi_single_gradient(
    t: f64,
    r_star: f64,
    spec: &WavepacketSpec,
) -> (ComplexAmplitude, ComplexAmplitude) {
    let (wo, wi) = spec.weights();
    let (u, v) = (t - r_star, t + r_star);
    let out = packet(u, spec) * wo * packet_log_derivative(u, spec);
    let inc = packet(v, spec) * wi * packet_log_derivative(v, spec);
    (out + inc, inc - out)
}

/// Momentum-space evaluation of the single-photon amplitude.
///
/// Both terms are integrated over the outgoing window, the ingoing one after
/// the substitution `k -> -k`. Independent of the closed form.
pub fn psi_quadrature(
    t: f64,
    r_star: f64,
    spec: &WavepacketSpec,
    integrator: &Integrator,
) -> Result<ComplexAmplitude> {
    let (wo, wi) = spec.weights();
    let (u, v) = (t - r_star, t + r_star);
    let (a, b) = spec.support();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let res = integrator.integrate(
        |k| {
            let out = momentum_profile(k, Branch::Outgoing, spec) * wo * (-I * k * u).exp();
            let inc = momentum_profile(-k, Branch::Ingoing, spec) * wi * (-I * k * v).exp();
            out + inc
        },
        a,
        b,
    )?;
    Ok(res.value * norm)
}

/// Weighting of a momentum-space integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    Amplitude,
    /// Extra factor of the frequency `k`.
    Frequency,
}

/// Quadrature of `int dk/sqrt(2 pi) f_+(k) k^n exp(-i k w)` for a null coordinate `w`.
pub fn packet_quadrature(
    w: f64,
    moment: Moment,
    spec: &WavepacketSpec,
    integrator: &Integrator,
) -> Result<Complex64> {
    let (a, b) = spec.support();
    let res = integrator.integrate(
        |k| {
            let weight = match moment {
                Moment::Amplitude => 1.0,
                Moment::Frequency => k,
            };
            (-I * k * w).exp() * (momentum_profile(k, Branch::Outgoing, spec) * weight)
        },
        a,
        b,
    )?;
    Ok(res.value / (2.0 * PI).sqrt())
}

/// Pair of events, one per photon, each with its own time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonEvent {
    pub first: SpacetimePoint,
    pub second: SpacetimePoint,
}

impl TwoPhotonEvent {
    pub fn new(first: SpacetimePoint, second: SpacetimePoint) -> Self {
        Self { first, second }
    }

    /// Both photons on the common timeslice `t`.
    pub fn equal_time(t: f64, r1_star: f64, r2_star: f64) -> Self {
        Self {
            first: SpacetimePoint::new(t, r1_star),
            second: SpacetimePoint::new(t, r2_star),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            first: self.second,
            second: self.first,
        }
    }
}

/// Exchange-symmetrised two-photon amplitude.
pub fn two_photon_psi(ev: &TwoPhotonEvent, spec: &WavepacketSpec) -> ComplexAmplitude {
    let (a, b) = (ev.first, ev.second);
    let direct = outgoing(a.t, a.r_star, spec) * ingoing(b.t, b.r_star, spec);
    let exchanged = outgoing(b.t, b.r_star, spec) * ingoing(a.t, a.r_star, spec);
    (direct + exchanged) * std::f64::consts::FRAC_1_SQRT_2
}

/// Analytic gradients `(d/dt_1, d/dr*_1, d/dt_2, d/dr*_2)` of [`two_photon_psi`].
pub fn two_photon_gradient(ev: &TwoPhotonEvent, spec: &WavepacketSpec) -> [ComplexAmplitude; 4] {
    let (a, b) = (ev.first, ev.second);
    let (u1, v1, u2, v2) = (a.retarded(), a.advanced(), b.retarded(), b.advanced());
    let direct = packet(u1, spec) * packet(v2, spec) * std::f64::consts::FRAC_1_SQRT_2;
    let exchanged = packet(u2, spec) * packet(v1, spec) * std::f64::consts::FRAC_1_SQRT_2;
    let (du1, dv1) = (
        packet_log_derivative(u1, spec),
        packet_log_derivative(v1, spec),
    );
    let (du2, dv2) = (
        packet_log_derivative(u2, spec),
        packet_log_derivative(v2, spec),
    );
    [
        direct * du1 + exchanged * dv1,
        -(direct * du1) + exchanged * dv1,
        direct * dv2 + exchanged * du2,
        direct * dv2 - exchanged * du2,
    ]
}

/// Single-particle factors of the two-photon amplitude at both events.
///
/// Index 0 refers to the first event, 1 to the second. The `*_k` entries are
/// the frequency-weighted integrals, `psi1k = -i d/dr* psi1` and
/// `psi2k = +i d/dr* psi2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonComponents {
    pub psi1: [Complex64; 2],
    pub psi2: [Complex64; 2],
    pub psi1k: [Complex64; 2],
    pub psi2k: [Complex64; 2],
}

impl TwoPhotonComponents {
    pub fn swapped(&self) -> Self {
        let s = |x: [Complex64; 2]| [x[1], x[0]];
        Self {
            psi1: s(self.psi1),
            psi2: s(self.psi2),
            psi1k: s(self.psi1k),
            psi2k: s(self.psi2k),
        }
    }
}

pub fn two_photon_components(ev: &TwoPhotonEvent, spec: &WavepacketSpec) -> TwoPhotonComponents {
    let mut c = TwoPhotonComponents {
        psi1: [Complex64::default(); 2],
        psi2: [Complex64::default(); 2],
        psi1k: [Complex64::default(); 2],
        psi2k: [Complex64::default(); 2],
    };
    for (i, p) in [ev.first, ev.second].iter().enumerate() {
        let (u, v) = (p.retarded(), p.advanced());
        let (g1, g2) = (packet(u, spec), packet(v, spec));
        c.psi1[i] = g1;
        c.psi2[i] = g2;
        // -i * d/dr* of g1 and +i * d/dr* of g2
        c.psi1k[i] = -I * (-packet_log_derivative(u, spec)) * g1;
        c.psi2k[i] = I * packet_log_derivative(v, spec) * g2;
    }
    c
}

/// Same components evaluated by momentum-space quadrature.
pub fn two_photon_components_quadrature(
    ev: &TwoPhotonEvent,
    spec: &WavepacketSpec,
    integrator: &Integrator,
) -> Result<TwoPhotonComponents> {
    let mut c = two_photon_components(ev, spec);
    for (i, p) in [ev.first, ev.second].iter().enumerate() {
        let (u, v) = (p.retarded(), p.advanced());
        c.psi1[i] = packet_quadrature(u, Moment::Amplitude, spec, integrator)?;
        c.psi2[i] = packet_quadrature(v, Moment::Amplitude, spec, integrator)?;
        c.psi1k[i] = packet_quadrature(u, Moment::Frequency, spec, integrator)?;
        c.psi2k[i] = packet_quadrature(v, Moment::Frequency, spec, integrator)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadConfig;

    fn spec(alpha: f64) -> WavepacketSpec {
        WavepacketSpec::from_ratio(15.0, 1.0, alpha).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn spec_validation() {
        assert!(WavepacketSpec::new(15.0, 1.0, 1.5).is_err());
        assert!(WavepacketSpec::new(-1.0, 1.0, 0.5).is_err());
        assert!(WavepacketSpec::new(15.0, 0.0, 0.5).is_err());
        assert!(WavepacketSpec::new(15.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn profile_peak_and_symmetry() {
        let s = spec(0.5);
        let peak = momentum_profile(15.0, Branch::Outgoing, &s);
        assert!((peak - (2.0 * PI).powf(-0.25)).abs() < 1e-15);
        for d in [0.1, 0.7, 3.0] {
            let a = momentum_profile(15.0 + d, Branch::Outgoing, &s);
            let b = momentum_profile(15.0 - d, Branch::Outgoing, &s);
            assert!((a - b).abs() < 1e-16);
            assert!(a > 0.0 && a < peak);
        }
        assert_eq!(
            momentum_profile(-15.3, Branch::Ingoing, &s),
            momentum_profile(15.3, Branch::Outgoing, &s)
        );
    }

    #[test]
    fn profile_is_normalised() {
        let s = WavepacketSpec::from_ratio(15.0, 0.7, 1.0).unwrap();
        let q = Integrator::new(QuadConfig::default());
        let (a, b) = (s.k0() - 12.0 * s.sigma(), s.k0() + 12.0 * s.sigma());
        let norm = q
            .integrate(
                |k| Complex64::new(momentum_profile(k, Branch::Outgoing, &s).powi(2), 0.0),
                a,
                b,
            )
            .unwrap();
        assert!((norm.value.re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn envelope_peak_on_light_cone() {
        let s = spec(1.0);
        for t in [-2.0, 0.0, 1.3] {
            assert!((psi_single(t, t, &s).norm() - s.envelope_peak()).abs() < 1e-15);
        }
    }

    #[test]
    fn balanced_state_is_even_in_r_star() {
        let s = spec(0.5);
        for &(t, r) in &[(0.3, 0.7), (-1.1, 2.0), (2.2, -0.4)] {
            assert!(rel(psi_single(t, r, &s), psi_single(t, -r, &s)) < 1e-15);
        }
    }

    #[test]
    fn pure_packets_translate_rigidly() {
        for alpha in [0.0, 1.0] {
            let s = spec(alpha);
            let sign = if alpha == 1.0 { 1.0 } else { -1.0 };
            for &(t, r) in &[(0.5, 0.2), (-1.7, 1.1), (3.0, 2.4)] {
                let moved = psi_single(t, r, &s).norm();
                let start = psi_single(0.0, r - sign * t, &s).norm();
                assert!(
                    (moved - start).abs() <= 1e-15 * start.max(1e-300),
                    "alpha {alpha}"
                );
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let q = Integrator::new(QuadConfig::default());
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let s = spec(alpha);
            let peak = s.envelope_peak();
            for i in 0..20 {
                for j in 0..20 {
                    let t = -3.0 + 6.0 * i as f64 / 19.0;
                    let r = -4.0 + 8.0 * j as f64 / 19.0;
                    let exact = psi_single(t, r, &s);
                    let num = psi_quadrature(t, r, &s, &q).unwrap();
                    let err = (num - exact).norm();
                    assert!(err < 1e-10 * peak, "alpha {alpha} at ({t}, {r}): {err:e}");
                }
            }
        }
        let s = spec(0.5);
        let exact = psi_single(0.3, 0.7, &s);
        assert!(rel(psi_quadrature(0.3, 0.7, &s, &q).unwrap(), exact) < 1e-6);
        let s = spec(1.0);
        let d = psi_quadrature(0.4, 0.4, &s, &q).unwrap().norm() - s.envelope_peak();
        // the +/-10 sigma window drops a tail of order erfc(5)
        assert!(d.abs() < 1e-11, "{d:e}");
    }

    #[test]
    fn quadrature_self_converges() {
        let s = spec(0.75);
        let coarse = Integrator::new(QuadConfig {
            initial_panels: 32,
            ..QuadConfig::default()
        });
        let fine = Integrator::new(QuadConfig {
            initial_panels: 64,
            ..QuadConfig::default()
        });
        let a = psi_quadrature(0.9, -1.3, &s, &coarse).unwrap();
        let b = psi_quadrature(0.9, -1.3, &s, &fine).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn gradient_at_envelope_peak() {
        let s = spec(1.0);
        let psi = psi_single(0.0, 0.0, &s);
        let (dt, _) = psi_single_gradient(0.0, 0.0, &s);
        assert!((dt - (-I * s.k0() * psi)).norm() < 1e-14);
    }

    #[test]
    fn ingoing_gradient_factor() {
        let s = spec(0.0);
        let (t, r) = (0.4, -0.1);
        let psi = psi_single(t, r, &s);
        let (_, dr) = psi_single_gradient(t, r, &s);
        let expect = -Complex64::new(2.0 * (t + r), s.k0()) * psi;
        assert!(rel(dr, expect) < 1e-14);
    }

    #[test]
    fn gradient_matches_central_differences() {
        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let s = WavepacketSpec::from_ratio(15.0, 0.8, alpha).unwrap();
            let h = 1e-5 / s.sigma();
            for &(t, r) in &[(0.1, 0.35), (-1.2, 0.9), (0.7, -0.6), (2.0, 1.7)] {
                let (dt, dr) = psi_single_gradient(t, r, &s);
                let fd_t = (psi_single(t + h, r, &s) - psi_single(t - h, r, &s)) / (2.0 * h);
                let fd_r = (psi_single(t, r + h, &s) - psi_single(t, r - h, &s)) / (2.0 * h);
                // step chosen so truncation and rounding both sit below 1e-8
                assert!(
                    rel(fd_t, dt) < 1e-8,
                    "alpha {alpha} dt at ({t},{r}): {}",
                    rel(fd_t, dt)
                );
                assert!(
                    rel(fd_r, dr) < 1e-8,
                    "alpha {alpha} dr at ({t},{r}): {}",
                    rel(fd_r, dr)
                );
            }
        }
    }

    #[test]
    fn two_photon_exchange_and_coincidence() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let ev = TwoPhotonEvent::new(
            SpacetimePoint::new(0.2, -0.5),
            SpacetimePoint::new(-0.3, 0.8),
        );
        assert_eq!(two_photon_psi(&ev, &s), two_photon_psi(&ev.swapped(), &s));
        let same = TwoPhotonEvent::equal_time(0.1, 0.3, 0.3);
        let expect = outgoing(0.1, 0.3, &s) * ingoing(0.1, 0.3, &s) * std::f64::consts::SQRT_2;
        assert!(rel(two_photon_psi(&same, &s), expect) < 1e-15);
    }

    #[test]
    fn two_photon_factorises_when_separated() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        // at t = 6 the outgoing packet sits near r* = 6 and the ingoing one near -6
        let ev = TwoPhotonEvent::equal_time(6.0, 6.0 + 0.2, -6.0 + 0.1);
        let full = two_photon_psi(&ev, &s).norm_sqr();
        let product = 0.5 * (outgoing(6.0, 6.2, &s) * ingoing(6.0, -5.9, &s)).norm_sqr();
        assert!(((full - product) / product).abs() < 1e-10);
    }

    #[test]
    fn two_photon_gradient_matches_differences() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let ev = TwoPhotonEvent::new(
            SpacetimePoint::new(0.1, 0.25),
            SpacetimePoint::new(-0.2, -0.15),
        );
        let g = two_photon_gradient(&ev, &s);
        let h = 1e-5;
        let shift = |k: usize, d: f64| {
            let mut e = ev;
            match k {
                0 => e.first.t += d,
                1 => e.first.r_star += d,
                2 => e.second.t += d,
                _ => e.second.r_star += d,
            }
            two_photon_psi(&e, &s)
        };
        for (k, gk) in g.iter().enumerate() {
            let fd = (shift(k, h) - shift(k, -h)) / (2.0 * h);
            assert!(rel(fd, *gk) < 1e-8, "component {k}");
        }
    }

    #[test]
    fn frequency_components() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let q = Integrator::new(QuadConfig::default());
        let ev = TwoPhotonEvent::equal_time(-0.4, 0.1, -0.3);
        let a = two_photon_components(&ev, &s);
        let b = two_photon_components_quadrature(&ev, &s, &q).unwrap();
        for i in 0..2 {
            assert!(rel(b.psi1[i], a.psi1[i]) < 1e-6);
            assert!(rel(b.psi2[i], a.psi2[i]) < 1e-6);
            assert!(rel(b.psi1k[i], a.psi1k[i]) < 1e-6);
            assert!(rel(b.psi2k[i], a.psi2k[i]) < 1e-6);
        }
        // narrowband: psi1k ~ k0 psi1 at the envelope peak
        let peak = two_photon_components(&TwoPhotonEvent::equal_time(0.5, 0.5, -0.5), &s);
        assert!(rel(peak.psi1k[0], peak.psi1[0] * s.k0()) < 1.0 / s.k0_over_sigma());
        assert_eq!(two_photon_components(&ev.swapped(), &s), a.swapped());
    }

    #[test]
    fn negative_frequency_tail_is_negligible() {
        assert!(spec(0.5).negative_frequency_weight() < 1e-40);
        assert!(
            WavepacketSpec::from_ratio(1.0, 1.0, 0.5)
                .unwrap()
                .negative_frequency_weight()
                > 0.1
        );
    }
}
