//! Executable checks with machine-readable reports.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::currents::printed::{printed_single, printed_two};
use crate::currents::{
    continuity_residual, continuity_residual_two, single_current, two_photon_currents,
    velocity_single, Photon, TwoPhotonCurrents,
};
use crate::dynamics::stats::{ks_one_sample, ks_two_sample};
use crate::dynamics::{
    default_pair_window, default_window, density_grid, run_ensemble, run_from, sample_initial_two,
    EnsembleConfig, GridCdf, OdeTolerances, PairDensity, Route, Sampling, TrajectoryBundle,
    TrajectoryStatus,
};
use crate::error::Result;
use crate::geometry::{
    metric_function, null_velocity_roots, radial_from_tortoise, shift_from_ratio, warp_metric,
    SpacetimeParams,
};
use crate::quadrature::{Integrator, QuadConfig};
use crate::wavefunction::{SpacetimePoint, TwoPhotonEvent, WavepacketSpec};
use crate::weakvalues::{coincidence_amplitudes, weak_single, ComponentSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    DiscrepancyDocumented,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::DiscrepancyDocumented => "discrepancy-documented",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub t: f64,
    pub r_star: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Check family, shared by related reports.
    pub family: String,
    pub status: CheckStatus,
    pub max_error: f64,
    pub tolerance: f64,
    pub probe_count: usize,
    pub notes: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub deviation_map: Vec<DeviationPoint>,
}

impl CheckReport {
    /// Pass iff `max_error <= tolerance`; NaN counts as failure.
    pub fn measured(
        family: &str,
        name: impl Into<String>,
        max_error: f64,
        tolerance: f64,
        probe_count: usize,
        notes: impl Into<String>,
    ) -> Self {
        let status = if max_error <= tolerance && probe_count > 0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            family: family.to_string(),
            status,
            max_error,
            tolerance,
            probe_count,
            notes: notes.into(),
            deviation_map: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Rectangular `(t, r*)` probe grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub t_range: (f64, f64),
    pub r_star_range: (f64, f64),
    pub n_t: usize,
    pub n_r: usize,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            t_range: (-3.0, 3.0),
            r_star_range: (-4.0, 4.0),
            n_t: 20,
            n_r: 20,
        }
    }
}

impl ProbeGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lin = |(a, b): (f64, f64), n: usize, i: usize| {
            if n < 2 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        (0..self.n_t)
            .flat_map(|i| {
                (0..self.n_r).map(move |j| {
                    (
                        lin(self.t_range, self.n_t, i),
                        lin(self.r_star_range, self.n_r, j),
                    )
                })
            })
            .collect()
    }
}

const WEAKVALUE: &str = "weakvalue_kg";
const ROUTES: &str = "null_geodesic_equivalence";
const INTERVAL: &str = "null_interval";
const PRINTED: &str = "printed_forms";
const CONTINUITY: &str = "continuity";

/// Density cut relative to the grid peak below which the weak-value comparison is skipped.
pub const DENSITY_CUT: f64 = 1e-8;

/// Weak-value velocity `f p_w/H_w` against `reference(t, r, spec)` on the grid.
///
/// The deviation is `|dv| / max(|v_ref|, f)`, so that the local light speed
/// sets the scale where the reference velocity vanishes.
pub fn check_weakvalue_kg_with<R>(
    name: &str,
    specs: &[WavepacketSpec],
    params: &SpacetimeParams,
    grid: &ProbeGrid,
    quad: &Integrator,
    reference: R,
) -> CheckReport
where
    R: Fn(f64, f64, &WavepacketSpec) -> Result<f64> + Sync,
{
    let points = grid.points();
    let mut worst = (0.0_f64, 0.0, 0.0, 0.0);
    let mut probes = 0;
    let mut errors = 0;
    for spec in specs {
        let peak = points
            .iter()
            .map(|&(t, r)| single_current(t, r, spec).j0)
            .fold(0.0, f64::max);
        let results: Vec<Option<f64>> = points
            .par_iter()
            .map(|&(t, r_star)| {
                if single_current(t, r_star, spec).j0 <= DENSITY_CUT * peak {
                    return None;
                }
                let r = radial_from_tortoise(r_star, params);
                let eval = || -> Result<f64> {
                    let f = metric_function(r, params)?;
                    let w = weak_single(t, r_star, spec, quad, 0.0)?;
                    let v_ref = reference(t, r, spec)?;
                    Ok((f * w.ratio() - v_ref).abs() / v_ref.abs().max(f))
                };
                Some(eval().unwrap_or(f64::INFINITY))
            })
            .collect();
        for (dev, &(t, r)) in results.iter().zip(&points) {
            if let Some(d) = dev {
                probes += 1;
                if !d.is_finite() {
                    errors += 1;
                }
                if *d > worst.0 || d.is_nan() {
                    worst = (*d, spec.alpha(), t, r);
                }
            }
        }
    }
    CheckReport::measured(
        WEAKVALUE,
        name,
        worst.0,
        1e-6,
        probes,
        format!(
            "worst at alpha = {}, t = {}, r* = {}; {} evaluation errors",
            worst.1, worst.2, worst.3, errors
        ),
    )
}

pub fn check_weakvalue_kg_equivalence(
    specs: &[WavepacketSpec],
    params: &SpacetimeParams,
    grid: &ProbeGrid,
    quad: &Integrator,
) -> CheckReport {
    check_weakvalue_kg_with(
        "weakvalue_kg_single",
        specs,
        params,
        grid,
        quad,
        |t, r, s| velocity_single(t, r, params, s, 0.0),
    )
}

/// Random equal-time events at the given timeslices, photons within `+/- spread`.
pub fn random_events(n: usize, times: &[f64], spread: f64, seed: u64) -> Vec<TwoPhotonEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let t = times[i % times.len()];
            TwoPhotonEvent::equal_time(
                t,
                rng.gen_range(-spread..spread),
                rng.gen_range(-spread..spread),
            )
        })
        .collect()
}

fn component_deviation(a: &TwoPhotonCurrents, b: &TwoPhotonCurrents) -> f64 {
    let (x, y) = (a.components(), b.components());
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    x.iter()
        .zip(y)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
        / scale.max(f64::MIN_POSITIVE)
}

/// Coincidence weak-value forms `2 Re(psi* X)` against the two-photon currents.
pub fn check_weakvalue_two_photon(
    spec: &WavepacketSpec,
    events: &[TwoPhotonEvent],
    quad: &Integrator,
) -> CheckReport {
    let worst = events
        .par_iter()
        .map(|ev| {
            let a = coincidence_amplitudes(ev, spec, ComponentSource::Analytic, quad)
                .map(|a| a.current_forms());
            match a {
                Ok([h_a, p_a, h_b, p_b]) => {
                    let forms = TwoPhotonCurrents {
                        j1_0: h_a,
                        j1_1: p_a,
                        j2_0: h_b,
                        j2_1: p_b,
                    };
                    component_deviation(&forms, &two_photon_currents(ev, spec))
                }
                Err(_) => f64::INFINITY,
            }
        })
        .reduce(|| 0.0, f64::max);
    CheckReport::measured(
        WEAKVALUE,
        "weakvalue_kg_two_photon",
        worst,
        1e-10,
        events.len(),
        "deviation relative to the largest current component at each event",
    )
}

/// Largest `|dr*|` between two bundles integrated from the same initial data.
pub fn check_null_geodesic_equivalence(
    kg: &TrajectoryBundle,
    null: &TrajectoryBundle,
) -> CheckReport {
    let mut worst = 0.0_f64;
    let mut probes = 0;
    let mut mismatched = 0;
    for (a, b) in kg.trajectories.iter().zip(&null.trajectories) {
        if a.samples.len() != b.samples.len() || a.status != b.status {
            mismatched += 1;
        }
        for (p, q) in a.samples.iter().zip(&b.samples) {
            worst = worst.max((p.r_star - q.r_star).abs());
            probes += 1;
        }
    }
    if kg.trajectories.len() != null.trajectories.len() {
        mismatched += 1;
    }
    let max_error = if mismatched > 0 { f64::INFINITY } else { worst };
    CheckReport::measured(
        ROUTES,
        "kg_current_vs_metric_null",
        max_error,
        1e-6,
        probes,
        format!(
            "{} trajectories, {} with differing length or status",
            kg.trajectories.len(),
            mismatched
        ),
    )
}

/// Null-interval residual and metric determinant along every stored sample.
///
/// `v_s` is rebuilt from the stored `j1/j0` of each sample.
pub fn check_null_interval(
    bundles: &[&TrajectoryBundle],
    params: &SpacetimeParams,
) -> [CheckReport; 2] {
    let mut interval = 0.0_f64;
    let mut det = 0.0_f64;
    let mut probes = 0;
    for bundle in bundles {
        for traj in &bundle.trajectories {
            for s in &traj.samples {
                let metric = match warp_metric(shift_from_ratio(s.j1 / s.j0), s.r, params) {
                    Ok(m) => m,
                    Err(_) => {
                        interval = f64::INFINITY;
                        continue;
                    }
                };
                interval = interval.max(metric.interval(s.v).abs());
                det = det.max((metric.determinant() + 1.0).abs());
                probes += 1;
            }
        }
    }
    [
        CheckReport::measured(
            INTERVAL,
            "null_interval_residual",
            interval,
            1e-10,
            probes,
            "max |ds^2/dt^2| along trajectories",
        ),
        CheckReport::measured(
            INTERVAL,
            "metric_determinant",
            det,
            1e-12,
            probes,
            "max |det g + 1|",
        ),
    ]
}

/// Printed closed forms against the derivation-based currents.
///
/// The single-photon forms are compared after restoring the overall `k0`
/// factor, with deviations in units of `sqrt(2/pi) sigma k0`.
pub fn check_printed_forms(
    spec: &WavepacketSpec,
    grid: &ProbeGrid,
    events: &[TwoPhotonEvent],
) -> [CheckReport; 3] {
    let scale = (2.0 / std::f64::consts::PI).sqrt() * spec.sigma() * spec.k0();
    let mut j0_map = Vec::new();
    let (mut worst0, mut worst1) = (0.0_f64, 0.0_f64);
    let points = grid.points();
    for &(t, r) in &points {
        let exact = single_current(t, r, spec);
        let print = printed_single(t, r, spec);
        let d0 = (exact.j0 - spec.k0() * print.j0).abs() / scale;
        let d1 = (exact.j1 - spec.k0() * print.j1).abs() / scale;
        worst0 = worst0.max(d0);
        worst1 = worst1.max(d1);
        j0_map.push(DeviationPoint {
            t,
            r_star: r,
            deviation: d0,
        });
    }
    let j1 = CheckReport::measured(
        PRINTED,
        "printed_j1_single",
        worst1,
        1e-10,
        points.len(),
        "printed form times k0 against the derivation",
    );
    let mut j0 = CheckReport::measured(
        PRINTED,
        "printed_j0_single",
        worst0,
        1e-10,
        points.len(),
        "printed cross term uses cos(2 k0 r*) with unit coefficient and t in the sine prefactor; \
         the derivation gives coefficient 2 and r* in the prefactor",
    );
    if j0.status == CheckStatus::Fail {
        j0.status = CheckStatus::DiscrepancyDocumented;
        j0.deviation_map = j0_map;
    }
    let two = events
        .iter()
        .map(|ev| component_deviation(&printed_two(ev, spec), &two_photon_currents(ev, spec)))
        .fold(0.0, f64::max);
    let two = CheckReport::measured(
        PRINTED,
        "printed_two_photon",
        two,
        1e-10,
        events.len(),
        "deviation relative to the largest current component at each event",
    );
    [j1, j0, two]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuityScenario {
    Single,
    TwoPhoton(Photon),
}

/// Convergence order of the central-difference continuity residual under `h -> h/2`.
///
/// Probes whose residual is already below `1e-9` of the local density over `h`
/// are exact to rounding and counted as converged. The reported error is
/// `max(0, 2 - min order)` against a tolerance of `0.2`.
pub fn check_continuity(
    spec: &WavepacketSpec,
    scenario: ContinuityScenario,
    probes: &[TwoPhotonEvent],
    h: f64,
) -> CheckReport {
    let mut min_order = f64::INFINITY;
    let mut exact = 0;
    for ev in probes {
        let (a, b, density) = match scenario {
            ContinuityScenario::Single => {
                let (t, r) = (ev.first.t, ev.first.r_star);
                (
                    continuity_residual(t, r, spec, h).abs(),
                    continuity_residual(t, r, spec, 0.5 * h).abs(),
                    single_current(t, r, spec).j0.abs(),
                )
            }
            ContinuityScenario::TwoPhoton(photon) => {
                let c = two_photon_currents(ev, spec);
                let density = match photon {
                    Photon::First => c.j1_0,
                    Photon::Second => c.j2_0,
                };
                (
                    continuity_residual_two(ev, photon, spec, h).abs(),
                    continuity_residual_two(ev, photon, spec, 0.5 * h).abs(),
                    density.abs(),
                )
            }
        };
        if a <= 1e-9 * density.max(f64::MIN_POSITIVE) / h {
            exact += 1;
            continue;
        }
        min_order = min_order.min((a / b).log2());
    }
    let name = match scenario {
        ContinuityScenario::Single => format!("continuity_single_alpha_{}", spec.alpha()),
        ContinuityScenario::TwoPhoton(Photon::First) => "continuity_two_photon_first".to_string(),
        ContinuityScenario::TwoPhoton(Photon::Second) => "continuity_two_photon_second".to_string(),
    };
    let shortfall = if min_order.is_finite() {
        (2.0 - min_order).max(0.0)
    } else {
        0.0
    };
    let shortfall = if min_order.is_nan() {
        f64::NAN
    } else {
        shortfall
    };
    CheckReport::measured(
        CONTINUITY,
        name,
        shortfall,
        0.2,
        probes.len(),
        format!("minimum order {min_order:.4} at h = {h}; {exact} probes exact to rounding"),
    )
}

/// Probe events where the state has weight: `t` in `[-1, 1]`, photons near their packets.
pub fn continuity_probes(n: usize, two_time: bool, seed: u64) -> Vec<TwoPhotonEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t1: f64 = rng.gen_range(-1.0..1.0);
            let t2 = if two_time {
                rng.gen_range(-1.0..1.0)
            } else {
                t1
            };
            TwoPhotonEvent::new(
                SpacetimePoint::new(t1, rng.gen_range(-1.2..1.2)),
                SpacetimePoint::new(t2, rng.gen_range(-1.2..1.2)),
            )
        })
        .collect()
}

/// Strict ordering of trajectories at every shared sample time.
pub fn check_no_crossing(bundle: &TrajectoryBundle) -> CheckReport {
    let mut violations = 0usize;
    let mut min_gap = f64::INFINITY;
    let n = bundle.times.len();
    let full: Vec<_> = bundle
        .trajectories
        .iter()
        .filter(|t| t.samples.len() == n)
        .collect();
    let mut order: Vec<usize> = (0..full.len()).collect();
    order.sort_by(|&a, &b| {
        full[a].samples[0]
            .r_star
            .total_cmp(&full[b].samples[0].r_star)
    });
    for k in 0..n {
        for w in order.windows(2) {
            let gap = full[w[1]].samples[k].r_star - full[w[0]].samples[k].r_star;
            min_gap = min_gap.min(gap);
            if !(gap > 0.0) {
                violations += 1;
            }
        }
    }
    CheckReport::measured(
        "no_crossing",
        "ordering_preserved",
        violations as f64,
        0.0,
        full.len() * n,
        format!(
            "{} of {} trajectories reached t1; minimum neighbour gap {min_gap:e}",
            full.len(),
            bundle.trajectories.len()
        ),
    )
}

/// KS distance of final positions against the normalised `j0(t1, .)`.
pub fn check_density_transport(
    bundle: &TrajectoryBundle,
    spec: &WavepacketSpec,
    resolution: usize,
) -> CheckReport {
    let t1 = bundle.info.t1;
    let nodes = bundle.info.window.nodes(resolution);
    let density: Vec<f64> = nodes
        .iter()
        .map(|&r| single_current(t1, r, spec).j0)
        .collect();
    let finals = bundle.final_positions();
    let (d, note) = match GridCdf::new(nodes, &density) {
        Ok(cdf) => (ks_one_sample(&finals, |x| cdf.eval(x)), String::new()),
        Err(e) => (f64::INFINITY, e.to_string()),
    };
    CheckReport::measured(
        "density_transport",
        "ks_final_positions",
        d,
        0.02,
        finals.len(),
        format!(
            "{} of {} trajectories reached t1 = {t1} {note}",
            finals.len(),
            bundle.trajectories.len()
        ),
    )
}

/// `|v|/f` must exceed this to count, so that rounding on pure packets does not.
pub const SUPERLUMINAL_MARGIN: f64 = 1.0 + 1e-9;

/// Existence of field points with `|dr/dt| > f(r)` and non-negligible density.
pub fn check_superluminal(
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    times: &[f64],
    window: crate::dynamics::Window,
    resolution: usize,
) -> CheckReport {
    let mut best = (0.0_f64, 0.0, 0.0);
    let mut count = 0usize;
    let mut probes = 0usize;
    for &t in times {
        let grid = density_grid(t, window, resolution, spec, params);
        let peak = grid.iter().map(|g| g.j0).fold(0.0, f64::max);
        for g in &grid {
            probes += 1;
            if g.j0 <= DENSITY_CUT * peak {
                continue;
            }
            let f = metric_function(g.r, params).unwrap_or(f64::NAN);
            let ratio = g.v.abs() / f;
            if ratio > SUPERLUMINAL_MARGIN {
                count += 1;
            }
            if ratio > best.0 {
                best = (ratio, t, g.r_star);
            }
        }
    }
    let max_error = if best.0 > SUPERLUMINAL_MARGIN {
        0.0
    } else {
        (SUPERLUMINAL_MARGIN - best.0).max(f64::MIN_POSITIVE)
    };
    CheckReport::measured(
        "superluminal",
        "superluminal_coordinate_velocity",
        max_error,
        0.0,
        probes,
        format!(
            "{count} grid points with |v| > f(r); max |v|/f = {:.6} at t = {}, r* = {}",
            best.0, best.1, best.2
        ),
    )
}

/// Pointwise `j1^mu(R1, R2) = j2^mu(R2, R1)`.
pub fn check_exchange_pointwise(spec: &WavepacketSpec, events: &[TwoPhotonEvent]) -> CheckReport {
    let worst = events
        .iter()
        .map(|ev| {
            let a = two_photon_currents(ev, spec);
            let b = two_photon_currents(&ev.swapped(), spec);
            let swapped = TwoPhotonCurrents {
                j1_0: b.j2_0,
                j1_1: b.j2_1,
                j2_0: b.j1_0,
                j2_1: b.j1_1,
            };
            component_deviation(&swapped, &a)
        })
        .fold(0.0, f64::max);
    CheckReport::measured(
        "exchange_symmetry",
        "exchange_pointwise",
        worst,
        1e-12,
        events.len(),
        "relative to the largest component",
    )
}

/// Two-sample KS between the first- and second-photon marginals of a pair cloud.
pub fn check_exchange_samples(pairs: &[(f64, f64)]) -> CheckReport {
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    CheckReport::measured(
        "exchange_symmetry",
        "exchange_sample_marginals",
        ks_two_sample(&a, &b),
        0.03,
        pairs.len(),
        "two-sample KS between r1* and r2* samples",
    )
}

/// Pure packets, the symmetry axis, and the flat warp field.
pub fn check_limiting_trajectories(
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    tol: &OdeTolerances,
) -> Vec<CheckReport> {
    let cfg = EnsembleConfig {
        n_traj: 1,
        t0: -2.0,
        t1: 2.0,
        n_times: 41,
        tolerances: *tol,
        ..EnsembleConfig::default()
    };
    let starts = [-2.3, -1.9, -1.5];
    let mut out = Vec::new();
    for (alpha, slope) in [(1.0, 1.0), (0.0, -1.0)] {
        let s = spec.with_alpha(alpha).expect("alpha in range");
        let window = default_window(&s, cfg.t0, cfg.t1);
        let starts: Vec<f64> = starts.iter().map(|x| -slope * x).collect();
        let (err, n) = match run_from(&cfg, &s, params, &starts, 0.0, window) {
            Ok(b) => worst_line(&b, slope, cfg.t0, |x| x.r_star),
            Err(_) => (f64::INFINITY, 0),
        };
        out.push(CheckReport::measured(
            "limiting_trajectories",
            format!("pure_packet_alpha_{alpha}"),
            err,
            1e-9,
            n,
            format!("r*(t) = r*0 + ({slope}) (t - t0)"),
        ));
    }
    let s = spec.with_alpha(0.5).expect("alpha in range");
    let axis = match run_from(
        &cfg,
        &s,
        params,
        &[0.0],
        0.0,
        default_window(&s, cfg.t0, cfg.t1),
    ) {
        Ok(b) => {
            let n = b.trajectories[0].samples.len();
            let worst = b.trajectories[0]
                .samples
                .iter()
                .map(|x| x.r_star.abs())
                .fold(0.0, f64::max);
            (
                if n == b.times.len() {
                    worst
                } else {
                    f64::INFINITY
                },
                n,
            )
        }
        Err(_) => (f64::INFINITY, 0),
    };
    out.push(CheckReport::measured(
        "limiting_trajectories",
        "balanced_symmetry_axis",
        axis.0,
        1e-9,
        axis.1,
        "trajectory from r* = 0 at alpha = 1/2",
    ));

    // flat space: Schwarzschild reduces to Minkowski, warp block to -(1 - v^2) dt^2 - 2 v dt dr + dr^2
    let flat = SpacetimeParams::flat();
    let mut worst = 0.0_f64;
    let mut n = 0;
    for &v in &[-2.5, -1.0, -0.3, 0.0, 0.4, 1.0, 3.0] {
        for &r in &[-3.0, 0.5, 4.0] {
            let m = warp_metric(v, r, &flat).expect("flat metric is regular");
            let (hi, lo) = null_velocity_roots(&m);
            worst = worst
                .max((m.g_tt + 1.0 - v * v).abs())
                .max((m.g_rr - 1.0).abs())
                .max((m.g_tr + v).abs())
                .max((hi - (v + 1.0)).abs())
                .max((lo - (v - 1.0)).abs());
            n += 1;
        }
    }
    let s = spec.with_alpha(1.0).expect("alpha in range");
    let line = match run_from(
        &cfg,
        &s,
        &flat,
        &[-1.7, -2.0],
        0.0,
        default_window(&s, cfg.t0, cfg.t1),
    ) {
        Ok(b) => worst_line(&b, 1.0, cfg.t0, |x| x.r),
        Err(_) => (f64::INFINITY, 0),
    };
    out.push(CheckReport::measured(
        "limiting_trajectories",
        "flat_warp_field",
        worst.max(line.0),
        1e-9,
        n + line.1,
        "m = 0 metric block, its null roots v +/- 1, and straight outgoing lines",
    ));
    out
}

fn worst_line<F: Fn(&crate::dynamics::TrajectorySample) -> f64>(
    b: &TrajectoryBundle,
    slope: f64,
    t0: f64,
    coord: F,
) -> (f64, usize) {
    let mut worst = 0.0_f64;
    let mut n = 0;
    for traj in &b.trajectories {
        if traj.samples.len() != b.times.len() {
            return (f64::INFINITY, n);
        }
        let x0 = coord(&traj.samples[0]);
        for s in &traj.samples {
            worst = worst.max((coord(s) - x0 - slope * (s.t - t0)).abs());
            n += 1;
        }
    }
    (worst, n)
}

/// Parameters of the full suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub mass: f64,
    pub sigma: f64,
    pub k0_over_sigma: f64,
    pub two_photon_k0_over_sigma: f64,
    pub seed: u64,
    pub n_traj: usize,
    pub n_transport: usize,
    pub n_events: usize,
    pub t0: f64,
    pub t1: f64,
    pub tolerances: OdeTolerances,
    pub node_floor: f64,
    pub resolution: usize,
    pub resolution_2d: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            sigma: 1.0,
            k0_over_sigma: 15.0,
            two_photon_k0_over_sigma: 20.0,
            seed: 0,
            n_traj: 200,
            n_transport: 5000,
            n_events: 1000,
            t0: -3.0,
            t1: 3.0,
            tolerances: OdeTolerances::default(),
            node_floor: crate::currents::DEFAULT_NODE_FLOOR,
            resolution: 2048,
            resolution_2d: 512,
        }
    }
}

/// Runs every check family at the configured parameter points.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let params = SpacetimeParams::new(cfg.mass)?;
    let single = |alpha| WavepacketSpec::from_ratio(cfg.k0_over_sigma, cfg.sigma, alpha);
    let two = WavepacketSpec::from_ratio(cfg.two_photon_k0_over_sigma, cfg.sigma, 0.5)?;
    let quad = Integrator::new(QuadConfig::default());
    let grid = ProbeGrid {
        t_range: (cfg.t0, cfg.t1),
        ..ProbeGrid::default()
    };
    let mut reports = Vec::new();

    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let specs: Vec<WavepacketSpec> = alphas.iter().map(|&a| single(a)).collect::<Result<_>>()?;
    reports.push(check_weakvalue_kg_equivalence(
        &specs, &params, &grid, &quad,
    ));
    let events = random_events(cfg.n_events, &[-1.0, 0.0], 2.5, cfg.seed);
    reports.push(check_weakvalue_two_photon(&two, &events, &quad));

    let ens = EnsembleConfig {
        n_traj: cfg.n_traj,
        t0: cfg.t0,
        t1: cfg.t1,
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        node_floor: cfg.node_floor,
        resolution: cfg.resolution,
        resolution_2d: cfg.resolution_2d,
        ..EnsembleConfig::default()
    };
    let balanced = single(0.5)?;
    let kg = run_ensemble(&ens, &balanced, &params)?;
    let null = run_ensemble(
        &EnsembleConfig {
            route: Route::MetricNull,
            ..ens.clone()
        },
        &balanced,
        &params,
    )?;
    reports.push(check_null_geodesic_equivalence(&kg, &null));
    let skewed = single(0.75)?;
    let extra = run_ensemble(
        &EnsembleConfig {
            n_traj: 100,
            sampling: Sampling::Pseudorandom,
            ..ens.clone()
        },
        &skewed,
        &params,
    )?;
    reports.extend(check_null_interval(&[&kg, &null, &extra], &params));

    let audit_events = random_events(100, &[-1.0, 0.0], 2.5, cfg.seed ^ 0x5eed);
    reports.extend(check_printed_forms(&balanced, &grid, &audit_events));

    let h = 4e-3 / cfg.sigma;
    let probes = continuity_probes(20, false, cfg.seed);
    for &alpha in &[0.5, 0.75, 1.0] {
        reports.push(check_continuity(
            &single(alpha)?,
            ContinuityScenario::Single,
            &probes,
            h,
        ));
    }
    let probes2 = continuity_probes(20, true, cfg.seed + 1);
    for photon in [Photon::First, Photon::Second] {
        reports.push(check_continuity(
            &two,
            ContinuityScenario::TwoPhoton(photon),
            &probes2,
            h,
        ));
    }

    reports.push(check_no_crossing(&kg));
    let transport_cfg = EnsembleConfig {
        n_traj: cfg.n_transport,
        t0: -2.0 / cfg.sigma,
        t1: 2.0 / cfg.sigma,
        n_times: 41,
        ..ens.clone()
    };
    let transport = run_ensemble(&transport_cfg, &balanced, &params)?;
    reports.push(check_density_transport(
        &transport,
        &balanced,
        4 * cfg.resolution,
    ));

    let frames: Vec<f64> = (0..7).map(|i| -1.5 + 0.5 * i as f64).collect();
    let window = default_window(&balanced, -1.5, 1.5);
    reports.push(check_superluminal(
        &balanced,
        &params,
        &frames,
        window,
        cfg.resolution,
    ));

    reports.push(check_exchange_pointwise(
        &two,
        &random_events(cfg.n_events, &[-1.0, 0.0], 2.5, cfg.seed + 2),
    ));
    let pair_window = default_pair_window(&two, -1.0, 1.0);
    let pairs = sample_initial_two(
        -1.0,
        &two,
        cfg.n_transport,
        Sampling::Quantile,
        cfg.seed,
        pair_window,
        cfg.resolution_2d,
        PairDensity::Amplitude,
    )?;
    reports.push(check_exchange_samples(&pairs));

    reports.extend(check_limiting_trajectories(
        &balanced,
        &params,
        &cfg.tolerances,
    ));
    Ok(reports)
}

/// Reports that did not pass and are not documented discrepancies.
pub fn failures(reports: &[CheckReport]) -> Vec<&CheckReport> {
    reports.iter().filter(|r| r.failed()).collect()
}

/// Statuses by trajectory, useful when summarising bundles.
pub fn status_counts(bundle: &TrajectoryBundle) -> [(TrajectoryStatus, usize); 3] {
    let count = |s| bundle.trajectories.iter().filter(|t| t.status == s).count();
    [
        (
            TrajectoryStatus::Completed,
            count(TrajectoryStatus::Completed),
        ),
        (
            TrajectoryStatus::NodeAborted,
            count(TrajectoryStatus::NodeAborted),
        ),
        (
            TrajectoryStatus::HorizonAsymptotic,
            count(TrajectoryStatus::HorizonAsymptotic),
        ),
    ]
}
