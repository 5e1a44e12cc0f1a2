//! Trajectory ensembles of the single- and two-photon velocity fields.
//!
//! Integration runs in `(t, r*)`; Schwarzschild `r` and `dr/dt` are attached
//! to every stored sample.

pub mod ode;
pub mod sampling;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::currents::{single_current, two_photon_currents, CurrentSample, DEFAULT_NODE_FLOOR};
use crate::error::{Error, Result};
use crate::geometry::{
    guiding_null_velocity, metric_function, radial_from_tortoise, SpacetimeParams,
};
use crate::wavefunction::{two_photon_psi, TwoPhotonEvent, WavepacketSpec};

pub use ode::{OdeSolution, OdeStop, OdeTolerances};
pub use sampling::{GridCdf, JointCdf, Sampling, Window};

/// Which construction supplies `dr*/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// `j1/j0` directly.
    KgCurrent,
    /// Null ray of the guiding metric, converted back to `dr*/dt`.
    MetricNull,
}

/// Joint density used to draw initial photon pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairDensity {
    /// `|psi_M|^2`.
    Amplitude,
    /// Mean of both photons' `j0`.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryStatus {
    Completed,
    NodeAborted,
    /// Completed, but ended with `f(r)` at the rounding floor.
    HorizonAsymptotic,
}

impl TrajectoryStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::NodeAborted => "node-aborted",
            Self::HorizonAsymptotic => "horizon-asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub r_star: f64,
    pub r: f64,
    /// Schwarzschild coordinate velocity `dr/dt`.
    pub v: f64,
    pub j0: f64,
    pub j1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub samples: Vec<TrajectorySample>,
    pub status: TrajectoryStatus,
}

/// A velocity field on `N` tortoise coordinates sharing one time.
pub trait VelocityField<const N: usize>: Sync {
    fn tortoise_velocity(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;
    fn currents(&self, t: f64, y: &[f64; N]) -> [CurrentSample; N];
    fn params(&self) -> &SpacetimeParams;
}

fn route_velocity(
    route: Route,
    c: CurrentSample,
    t: f64,
    r_star: f64,
    params: &SpacetimeParams,
    floor: f64,
) -> Result<f64> {
    let ratio = c.checked_ratio(t, r_star, floor)?;
    match route {
        Route::KgCurrent => Ok(ratio),
        Route::MetricNull => {
            let r = radial_from_tortoise(r_star, params);
            let f = metric_function(r, params)?;
            Ok(guiding_null_velocity(ratio, r, params)? / f)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleField {
    pub spec: WavepacketSpec,
    pub params: SpacetimeParams,
    pub route: Route,
    /// Absolute floor on `|j0|`.
    pub node_floor: f64,
}

impl VelocityField<1> for SingleField {
    fn tortoise_velocity(&self, t: f64, y: &[f64; 1]) -> Result<[f64; 1]> {
        let c = single_current(t, y[0], &self.spec);
        Ok([route_velocity(
            self.route,
            c,
            t,
            y[0],
            &self.params,
            self.node_floor,
        )?])
    }

    fn currents(&self, t: f64, y: &[f64; 1]) -> [CurrentSample; 1] {
        [single_current(t, y[0], &self.spec)]
    }

    fn params(&self) -> &SpacetimeParams {
        &self.params
    }
}

/// Coupled photon pair on the common timeslice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhotonField {
    pub spec: WavepacketSpec,
    pub params: SpacetimeParams,
    pub route: Route,
    pub node_floor: f64,
}

impl VelocityField<2> for TwoPhotonField {
    fn tortoise_velocity(&self, t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        let [a, b] = self.currents(t, y);
        Ok([
            route_velocity(self.route, a, t, y[0], &self.params, self.node_floor)?,
            route_velocity(self.route, b, t, y[1], &self.params, self.node_floor)?,
        ])
    }

    fn currents(&self, t: f64, y: &[f64; 2]) -> [CurrentSample; 2] {
        let c = two_photon_currents(&TwoPhotonEvent::equal_time(t, y[0], y[1]), &self.spec);
        [c.first(), c.second()]
    }

    fn params(&self) -> &SpacetimeParams {
        &self.params
    }
}

/// Integrates one initial point of `field` and returns one trajectory per coordinate.
///
/// Trajectory `i` of the result gets id `first_id + i`.
pub fn integrate_trajectory<const N: usize, F: VelocityField<N>>(
    field: &F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    tol: &OdeTolerances,
    first_id: usize,
) -> [Trajectory; N] {
    let sol = ode::integrate(
        |t, y: &[f64; N]| field.tortoise_velocity(t, y),
        t0,
        y0,
        times,
        tol,
    );
    let params = field.params();
    let mut out: [Trajectory; N] = std::array::from_fn(|i| Trajectory {
        id: first_id + i,
        samples: Vec::with_capacity(sol.samples.len()),
        status: TrajectoryStatus::Completed,
    });
    for &(t, y) in &sol.samples {
        let currents = field.currents(t, &y);
        let speed = field.tortoise_velocity(t, &y).ok();
        for i in 0..N {
            let r = radial_from_tortoise(y[i], params);
            let f = metric_function(r, params).unwrap_or(0.0);
            let c = currents[i];
            let x = speed.map_or(c.j1 / c.j0, |s| s[i]);
            out[i].samples.push(TrajectorySample {
                t,
                r_star: y[i],
                r,
                v: f * x,
                j0: c.j0,
                j1: c.j1,
            });
        }
    }
    for traj in &mut out {
        traj.status = match sol.stop {
            OdeStop::Aborted => TrajectoryStatus::NodeAborted,
            OdeStop::Completed => {
                let last = traj.samples.last().map(|s| s.r);
                let f_end = last
                    .and_then(|r| metric_function(r, params).ok())
                    .unwrap_or(0.0);
                if params.mass() > 0.0 && f_end < 1e-12 {
                    TrajectoryStatus::HorizonAsymptotic
                } else {
                    TrajectoryStatus::Completed
                }
            }
        };
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub t0: f64,
    pub t1: f64,
    pub seed: u64,
    pub sampling: Sampling,
    pub route: Route,
    /// Number of shared output times, endpoints included.
    pub n_times: usize,
    /// `None` selects [`default_window`].
    pub window: Option<Window>,
    /// Nodes of the 1D density grid.
    pub resolution: usize,
    /// Cells per axis of the 2D pair density grid.
    pub resolution_2d: usize,
    pub tolerances: OdeTolerances,
    /// Node floor relative to the grid maximum of `j0` at `t0`.
    pub node_floor: f64,
    pub pair_density: PairDensity,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_traj: 200,
            t0: -3.0,
            t1: 3.0,
            seed: 0,
            sampling: Sampling::Quantile,
            route: Route::KgCurrent,
            n_times: 121,
            window: None,
            resolution: 2048,
            resolution_2d: 512,
            tolerances: OdeTolerances::default(),
            node_floor: DEFAULT_NODE_FLOOR,
            pair_density: PairDensity::Amplitude,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value: f64, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if self.n_traj == 0 {
            return bad("n_traj", 0.0, "at least one trajectory is required");
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return bad("t1", self.t1, "span needs finite t1 > t0");
        }
        if self.n_times < 2 {
            return bad("n_times", self.n_times as f64, "at least two output times");
        }
        if self.resolution < 2 || self.resolution_2d < 2 {
            return bad(
                "resolution",
                self.resolution.min(self.resolution_2d) as f64,
                "at least two nodes",
            );
        }
        if !(self.tolerances.rtol > 0.0 && self.tolerances.atol > 0.0) {
            return bad("rtol", self.tolerances.rtol, "tolerances must be positive");
        }
        if !(self.node_floor >= 0.0) {
            return bad("node_floor", self.node_floor, "must be non-negative");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        output_times(self.t0, self.t1, self.n_times)
    }
}

pub fn output_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Window spanning the occupied packet centres at `t0`, padded by `6/(2 sigma) + |t1 - t0|`.
pub fn default_window(spec: &WavepacketSpec, t0: f64, t1: f64) -> Window {
    let mut centres = Vec::with_capacity(2);
    if spec.alpha() > 0.0 {
        centres.push(t0);
    }
    if spec.alpha() < 1.0 {
        centres.push(-t0);
    }
    let lo = centres.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = centres.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = 3.0 / spec.sigma() + (t1 - t0).abs();
    Window {
        lo: lo - pad,
        hi: hi + pad,
    }
}

/// Window covering both photons of the pair state, which always occupies `+/- t0`.
pub fn default_pair_window(spec: &WavepacketSpec, t0: f64, t1: f64) -> Window {
    let pad = 3.0 / spec.sigma() + (t1 - t0).abs();
    Window {
        lo: -t0.abs() - pad,
        hi: t0.abs() + pad,
    }
}

/// `j0(t, .)` tabulated on the window nodes, plus its outside-mass fraction.
fn single_density(
    t: f64,
    spec: &WavepacketSpec,
    window: Window,
    resolution: usize,
) -> Result<(GridCdf, f64)> {
    let n = resolution.max(2);
    let wide = window.scaled(3.0);
    let wide_nodes = wide.nodes(3 * (n - 1) + 1);
    let density: Vec<f64> = wide_nodes
        .iter()
        .map(|&r| single_current(t, r, spec).j0)
        .collect();
    let inner = &density[n - 1..2 * (n - 1) + 1];
    let total = GridCdf::new(wide_nodes.clone(), &density)?;
    let cdf = GridCdf::new(wide_nodes[n - 1..2 * (n - 1) + 1].to_vec(), inner)?;
    let outside = (1.0 - cdf.mass() / total.mass()).max(0.0);
    if outside > 1e-6 {
        return Err(Error::WindowTooSmall {
            outside_mass: outside,
            lo: window.lo,
            hi: window.hi,
        });
    }
    let peak = inner.iter().cloned().fold(0.0, f64::max);
    Ok((cdf, peak))
}

/// Initial tortoise positions distributed as the normalised `j0(t0, .)`.
pub fn sample_initial_single(
    t0: f64,
    spec: &WavepacketSpec,
    n: usize,
    strategy: Sampling,
    seed: u64,
    window: Window,
    resolution: usize,
) -> Result<Vec<f64>> {
    let (cdf, _) = single_density(t0, spec, window, resolution)?;
    Ok(sampling::uniforms(n, strategy, seed)
        .into_iter()
        .map(|u| cdf.quantile(u))
        .collect())
}

fn pair_density_value(t: f64, r1: f64, r2: f64, spec: &WavepacketSpec, kind: PairDensity) -> f64 {
    let ev = TwoPhotonEvent::equal_time(t, r1, r2);
    match kind {
        PairDensity::Amplitude => two_photon_psi(&ev, spec).norm_sqr(),
        PairDensity::Current => {
            let c = two_photon_currents(&ev, spec);
            0.5 * (c.j1_0 + c.j2_0)
        }
    }
}

fn pair_cells(
    t: f64,
    spec: &WavepacketSpec,
    window: Window,
    cells: usize,
    kind: PairDensity,
) -> Vec<Vec<f64>> {
    let dx = window.width() / cells as f64;
    (0..cells)
        .into_par_iter()
        .map(|i| {
            let r1 = window.lo + (i as f64 + 0.5) * dx;
            (0..cells)
                .map(|j| pair_density_value(t, r1, window.lo + (j as f64 + 0.5) * dx, spec, kind))
                .collect()
        })
        .collect()
}

/// Initial photon pairs distributed as the selected joint density at `t0`.
#[allow(clippy::too_many_arguments)]
pub fn sample_initial_two(
    t0: f64,
    spec: &WavepacketSpec,
    n: usize,
    strategy: Sampling,
    seed: u64,
    window: Window,
    cells: usize,
    kind: PairDensity,
) -> Result<Vec<(f64, f64)>> {
    let grid = pair_cells(t0, spec, window, cells, kind);
    let wide = pair_cells(t0, spec, window.scaled(3.0), 3 * cells, kind);
    let inner: f64 = grid.iter().flatten().map(|d| d.max(0.0)).sum::<f64>();
    let total: f64 = wide.iter().flatten().map(|d| d.max(0.0)).sum::<f64>();
    let outside = (1.0 - inner / total).max(0.0);
    if outside > 1e-6 {
        return Err(Error::WindowTooSmall {
            outside_mass: outside,
            lo: window.lo,
            hi: window.hi,
        });
    }
    let joint = JointCdf::new(window, &grid)?;
    let u1 = sampling::uniforms(n, strategy, seed);
    let u2 = sampling::secondary_uniforms(n, strategy, seed);
    Ok(u1
        .into_iter()
        .zip(u2)
        .map(|(a, b)| joint.sample(a, b))
        .collect())
}

/// Resolved settings recorded alongside a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleInfo {
    pub photons: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub route: Route,
    pub mass: f64,
    pub k0: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub t0: f64,
    pub t1: f64,
    pub window: Window,
    pub rtol: f64,
    pub atol: f64,
    /// Absolute node floor actually applied.
    pub node_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFailure {
    pub id: usize,
    pub status: TrajectoryStatus,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBundle {
    pub times: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    pub failures: Vec<TrajectoryFailure>,
    pub info: BundleInfo,
}

impl TrajectoryBundle {
    fn new(times: Vec<f64>, trajectories: Vec<Trajectory>, info: BundleInfo) -> Self {
        let failures = trajectories
            .iter()
            .filter(|t| t.status == TrajectoryStatus::NodeAborted)
            .map(|t| TrajectoryFailure {
                id: t.id,
                status: t.status,
                t_end: t.samples.last().map_or(info.t0, |s| s.t),
            })
            .collect();
        Self {
            times,
            trajectories,
            failures,
            info,
        }
    }

    /// Final tortoise positions of trajectories that reached `t1`.
    pub fn final_positions(&self) -> Vec<f64> {
        let n = self.times.len();
        self.trajectories
            .iter()
            .filter(|t| t.samples.len() == n)
            .map(|t| t.samples[n - 1].r_star)
            .collect()
    }
}

fn info(
    cfg: &EnsembleConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    window: Window,
    floor: f64,
    photons: usize,
) -> BundleInfo {
    BundleInfo {
        photons,
        seed: cfg.seed,
        sampling: cfg.sampling,
        route: cfg.route,
        mass: params.mass(),
        k0: spec.k0(),
        sigma: spec.sigma(),
        alpha: spec.alpha(),
        t0: cfg.t0,
        t1: cfg.t1,
        window,
        rtol: cfg.tolerances.rtol,
        atol: cfg.tolerances.atol,
        node_floor: floor,
    }
}

/// Single-photon ensemble with density-weighted initial conditions.
pub fn run_ensemble(
    cfg: &EnsembleConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
) -> Result<TrajectoryBundle> {
    cfg.validate()?;
    let window = cfg
        .window
        .unwrap_or_else(|| default_window(spec, cfg.t0, cfg.t1));
    let (cdf, peak) = single_density(cfg.t0, spec, window, cfg.resolution)?;
    let starts: Vec<f64> = sampling::uniforms(cfg.n_traj, cfg.sampling, cfg.seed)
        .into_iter()
        .map(|u| cdf.quantile(u))
        .collect();
    run_from(cfg, spec, params, &starts, cfg.node_floor * peak, window)
}

/// Single-photon ensemble from given initial positions; `node_floor` is absolute.
pub fn run_from(
    cfg: &EnsembleConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    starts: &[f64],
    node_floor: f64,
    window: Window,
) -> Result<TrajectoryBundle> {
    cfg.validate()?;
    let field = SingleField {
        spec: *spec,
        params: *params,
        route: cfg.route,
        node_floor,
    };
    let times = cfg.times();
    let trajectories: Vec<Trajectory> = starts
        .par_iter()
        .enumerate()
        .map(|(id, &r0)| {
            let [t] = integrate_trajectory(&field, cfg.t0, [r0], &times, &cfg.tolerances, id);
            t
        })
        .collect();
    Ok(TrajectoryBundle::new(
        times,
        trajectories,
        info(cfg, spec, params, window, node_floor, 1),
    ))
}

/// Two-photon ensemble; pair `k` yields trajectories `2k` and `2k + 1`.
pub fn run_two_photon_ensemble(
    cfg: &EnsembleConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
) -> Result<TrajectoryBundle> {
    cfg.validate()?;
    let window = cfg
        .window
        .unwrap_or_else(|| default_pair_window(spec, cfg.t0, cfg.t1));
    let pairs = sample_initial_two(
        cfg.t0,
        spec,
        cfg.n_traj,
        cfg.sampling,
        cfg.seed,
        window,
        cfg.resolution_2d,
        cfg.pair_density,
    )?;
    let nodes = window.nodes(cfg.resolution);
    let peak = nodes
        .iter()
        .map(|&r| {
            let c = two_photon_currents(&TwoPhotonEvent::equal_time(cfg.t0, r, -r), spec);
            c.j1_0.max(c.j2_0)
        })
        .fold(0.0, f64::max);
    let floor = cfg.node_floor * peak;
    run_pairs_from(cfg, spec, params, &pairs, floor, window)
}

pub fn run_pairs_from(
    cfg: &EnsembleConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    pairs: &[(f64, f64)],
    node_floor: f64,
    window: Window,
) -> Result<TrajectoryBundle> {
    cfg.validate()?;
    let field = TwoPhotonField {
        spec: *spec,
        params: *params,
        route: cfg.route,
        node_floor,
    };
    let times = cfg.times();
    let trajectories: Vec<Trajectory> = pairs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, &(a, b))| {
            integrate_trajectory(&field, cfg.t0, [a, b], &times, &cfg.tolerances, 2 * k)
        })
        .collect();
    Ok(TrajectoryBundle::new(
        times,
        trajectories,
        info(cfg, spec, params, window, node_floor, 2),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub t: f64,
    pub r_star: f64,
    pub r: f64,
    pub j0: f64,
    pub j1: f64,
    /// `f(r) j1/j0`.
    pub v: f64,
}

/// Single-photon currents on a uniform tortoise grid.
pub fn density_grid(
    t: f64,
    window: Window,
    resolution: usize,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
) -> Vec<GridRow> {
    window
        .nodes(resolution)
        .into_iter()
        .map(|r_star| {
            let c = single_current(t, r_star, spec);
            let r = radial_from_tortoise(r_star, params);
            let f = metric_function(r, params).unwrap_or(0.0);
            GridRow {
                t,
                r_star,
                r,
                j0: c.j0,
                j1: c.j1,
                v: f * c.j1 / c.j0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub t: f64,
    pub r1_star: f64,
    pub r2_star: f64,
    pub density: f64,
}

/// `|psi_M|^2` on the square `window x window`, row-major in `r1*`.
pub fn joint_density_grid(
    t: f64,
    window: Window,
    resolution: usize,
    spec: &WavepacketSpec,
) -> Vec<JointRow> {
    let nodes = window.nodes(resolution);
    nodes
        .iter()
        .flat_map(|&r1| {
            nodes.iter().map(move |&r2| JointRow {
                t,
                r1_star: r1,
                r2_star: r2,
                density: two_photon_psi(&TwoPhotonEvent::equal_time(t, r1, r2), spec).norm_sqr(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tortoise_from_radial;

    fn spec(alpha: f64) -> WavepacketSpec {
        WavepacketSpec::from_ratio(15.0, 1.0, alpha).unwrap()
    }

    fn cfg(n: usize, t0: f64, t1: f64) -> EnsembleConfig {
        EnsembleConfig {
            n_traj: n,
            t0,
            t1,
            n_times: 31,
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn translating_packet_sample_mean() {
        let s = spec(1.0);
        let n = 4000;
        let w = default_window(&s, 0.0, 1.0);
        let xs = sample_initial_single(0.0, &s, n, Sampling::Pseudorandom, 5, w, 2048).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sigma_x = 1.0 / (2.0 * s.sigma());
        assert!(mean.abs() < 3.0 * sigma_x / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn symmetric_median_at_origin() {
        let s = spec(0.5);
        let w = default_window(&s, 0.0, 1.0);
        let xs = sample_initial_single(0.0, &s, 3, Sampling::Quantile, 0, w, 2048).unwrap();
        assert!(xs[1].abs() < 1e-12, "{xs:?}");
        assert!((xs[0] + xs[2]).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = spec(0.5);
        let w = default_window(&s, -1.0, 1.0);
        let a = sample_initial_single(-1.0, &s, 50, Sampling::Pseudorandom, 9, w, 512).unwrap();
        let b = sample_initial_single(-1.0, &s, 50, Sampling::Pseudorandom, 9, w, 512).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn narrow_window_rejected() {
        let s = spec(1.0);
        let w = Window::new(-0.5, 0.5).unwrap();
        assert!(matches!(
            sample_initial_single(0.0, &s, 10, Sampling::Quantile, 0, w, 256),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn unit_speed_for_pure_outgoing() {
        let s = spec(1.0);
        let c = cfg(5, 0.0, 2.0);
        let b = run_ensemble(&c, &s, &SpacetimeParams::default()).unwrap();
        assert!(b.failures.is_empty());
        for t in &b.trajectories {
            let r0 = t.samples[0].r_star;
            for p in &t.samples {
                assert!((p.r_star - r0 - p.t).abs() < 1e-9);
                let back = tortoise_from_radial(p.r, &SpacetimeParams::default()).unwrap();
                assert!((back - p.r_star).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetry_axis_is_invariant() {
        let s = spec(0.5);
        let c = cfg(1, -2.0, 2.0);
        let b = run_from(
            &c,
            &s,
            &SpacetimeParams::default(),
            &[0.0],
            0.0,
            default_window(&s, -2.0, 2.0),
        )
        .unwrap();
        assert_eq!(b.trajectories[0].status, TrajectoryStatus::Completed);
        for p in &b.trajectories[0].samples {
            assert!(p.r_star.abs() < 1e-9);
        }
    }

    #[test]
    fn flat_outgoing_is_straight_line() {
        let s = spec(1.0);
        let c = cfg(1, 0.0, 1.5);
        let flat = SpacetimeParams::flat();
        let b = run_from(&c, &s, &flat, &[0.3], 0.0, default_window(&s, 0.0, 1.5)).unwrap();
        for p in &b.trajectories[0].samples {
            assert!((p.r - 0.3 - p.t).abs() < 1e-12);
            assert!((p.v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn routes_agree_for_small_ensemble() {
        let s = spec(0.5);
        let mut c = cfg(20, -1.0, 1.0);
        let a = run_ensemble(&c, &s, &SpacetimeParams::default()).unwrap();
        c.route = Route::MetricNull;
        let b = run_ensemble(&c, &s, &SpacetimeParams::default()).unwrap();
        for (x, y) in a.trajectories.iter().zip(&b.trajectories) {
            for (p, q) in x.samples.iter().zip(&y.samples) {
                assert!((p.r_star - q.r_star).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ordering_preserved() {
        let s = spec(0.5);
        let b = run_ensemble(&cfg(40, -2.0, 2.0), &s, &SpacetimeParams::default()).unwrap();
        for k in 0..b.times.len() {
            let xs: Vec<f64> = b.trajectories.iter().map(|t| t.samples[k].r_star).collect();
            assert!(
                xs.windows(2).all(|w| w[0] < w[1]),
                "order broken at t = {}",
                b.times[k]
            );
        }
    }

    #[test]
    fn grid_mass_conserved() {
        let s = spec(0.5);
        let w = Window::new(-9.0, 9.0).unwrap();
        let mass = |t| {
            let g = density_grid(t, w, 4001, &s, &SpacetimeParams::default());
            g.windows(2)
                .map(|p| 0.5 * (p[0].j0 + p[1].j0) * (p[1].r_star - p[0].r_star))
                .sum::<f64>()
        };
        let (a, b) = (mass(-1.5), mass(0.4));
        assert!(((a - b) / a).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn grid_peak_follows_packet() {
        let s = spec(1.0);
        let g = density_grid(
            1.25,
            Window::new(-2.0, 4.0).unwrap(),
            2401,
            &s,
            &SpacetimeParams::default(),
        );
        let top = g.iter().max_by(|a, b| a.j0.total_cmp(&b.j0)).unwrap();
        assert!((top.r_star - 1.25).abs() < 3e-3);
    }

    #[test]
    fn joint_grid_is_exchange_symmetric() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let n = 41;
        let g = joint_density_grid(0.0, Window::new(-2.0, 2.0).unwrap(), n, &s);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(g[i * n + j].density, g[j * n + i].density);
            }
        }
    }

    #[test]
    fn pair_samples_deterministic_and_in_window() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let w = default_pair_window(&s, -1.0, 1.0);
        let a = sample_initial_two(
            -1.0,
            &s,
            200,
            Sampling::Pseudorandom,
            3,
            w,
            128,
            PairDensity::Amplitude,
        )
        .unwrap();
        let b = sample_initial_two(
            -1.0,
            &s,
            200,
            Sampling::Pseudorandom,
            3,
            w,
            128,
            PairDensity::Amplitude,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|&(x, y)| x >= w.lo && x <= w.hi && y >= w.lo && y <= w.hi));
    }

    #[test]
    fn two_photon_far_pairs_move_apart() {
        let s = WavepacketSpec::from_ratio(20.0, 1.0, 0.5).unwrap();
        let c = cfg(1, 4.0, 5.0);
        let b = run_pairs_from(
            &c,
            &s,
            &SpacetimeParams::default(),
            &[(4.05, -3.95)],
            0.0,
            default_pair_window(&s, 4.0, 5.0),
        )
        .unwrap();
        let (first, second) = (&b.trajectories[0], &b.trajectories[1]);
        assert_eq!((first.id, second.id), (0, 1));
        let last = b.times.len() - 1;
        assert!((first.samples[last].r_star - 5.05).abs() < 1e-8);
        assert!((second.samples[last].r_star + 4.95).abs() < 1e-8);
    }

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig {
            n_traj: 0,
            ..EnsembleConfig::default()
        }
        .validate()
        .is_err());
        assert!(EnsembleConfig {
            t1: -5.0,
            ..EnsembleConfig::default()
        }
        .validate()
        .is_err());
        assert!(EnsembleConfig::default().validate().is_ok());
    }
}
