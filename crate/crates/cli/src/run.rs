//! Scenario orchestration.

use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use weaktraj::dynamics::{
    default_pair_window, default_window, density_grid, joint_density_grid, run_ensemble,
    run_two_photon_ensemble, sample_initial_two, EnsembleConfig, OdeTolerances, Route,
    TrajectoryBundle, Window,
};
use weaktraj::geometry::SpacetimeParams;
use weaktraj::verify::{
    check_exchange_pointwise, check_exchange_samples, check_no_crossing,
    check_null_geodesic_equivalence, check_null_interval, check_superluminal, random_events,
    run_suite, status_counts, CheckReport, CheckStatus, SuiteConfig,
};
use weaktraj::wavefunction::WavepacketSpec;

use crate::config::{RunConfig, Scenario, WindowSetting, KEYS};
use crate::output::{density_csv, joint_density_csv, trajectories_csv, OutputWriter};

/// Process exit status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    ChecksFailed,
    Error,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::ChecksFailed => 1,
            Self::Error => 3,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub reports: Vec<CheckReport>,
    pub error: Option<String>,
}

#[derive(Default)]
struct Artifacts {
    reports: Vec<CheckReport>,
    trajectory_counts: Option<serde_json::Value>,
}

fn tolerances(cfg: &RunConfig) -> OdeTolerances {
    OdeTolerances {
        rtol: cfg.rtol,
        atol: cfg.atol,
        ..OdeTolerances::default()
    }
}

fn fixed_window(cfg: &RunConfig) -> Option<Window> {
    match cfg.window {
        WindowSetting::Fixed([lo, hi]) => Some(Window { lo, hi }),
        WindowSetting::Auto(_) => None,
    }
}

fn ensemble(cfg: &RunConfig) -> EnsembleConfig {
    EnsembleConfig {
        n_traj: cfg.n_traj,
        t0: cfg.t0,
        t1: cfg.t1,
        seed: cfg.seed,
        sampling: cfg.sampling,
        route: cfg.route,
        n_times: cfg.n_times,
        window: fixed_window(cfg),
        resolution: cfg.resolution,
        resolution_2d: cfg.resolution_2d,
        tolerances: tolerances(cfg),
        node_floor: cfg.node_floor,
        pair_density: cfg.pair_density,
    }
}

fn counts(bundle: &TrajectoryBundle) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (status, n) in status_counts(bundle) {
        m.insert(status.label().to_string(), json!(n));
    }
    json!({ "total": bundle.trajectories.len(), "by_status": m, "failures": bundle.failures })
}

fn single_density(
    w: &mut OutputWriter,
    cfg: &RunConfig,
    spec: &WavepacketSpec,
    params: &SpacetimeParams,
    window: Window,
) -> Result<()> {
    let rows: Vec<_> = cfg
        .frame_times()
        .into_iter()
        .flat_map(|t| density_grid(t, window, cfg.resolution, spec, params))
        .collect();
    w.write("density.csv", density_csv(&rows).as_bytes())?;
    Ok(())
}

fn run_single(w: &mut OutputWriter, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let spec = WavepacketSpec::from_ratio(cfg.k0_over_sigma, cfg.sigma, cfg.alpha)?;
    let params = SpacetimeParams::new(cfg.mass)?;
    let ens = ensemble(cfg);
    let primary = run_ensemble(&ens, &spec, &params).context("integrating the ensemble")?;
    w.write("trajectories.csv", trajectories_csv(&primary).as_bytes())?;
    art.trajectory_counts = Some(counts(&primary));
    single_density(w, cfg, &spec, &params, primary.info.window)?;

    let other_route = match cfg.route {
        Route::KgCurrent => Route::MetricNull,
        Route::MetricNull => Route::KgCurrent,
    };
    let other = run_ensemble(
        &EnsembleConfig {
            route: other_route,
            ..ens
        },
        &spec,
        &params,
    )
    .context("integrating the comparison route")?;
    let (kg, null) = match cfg.route {
        Route::KgCurrent => (&primary, &other),
        Route::MetricNull => (&other, &primary),
    };
    art.reports.push(check_null_geodesic_equivalence(kg, null));
    art.reports
        .extend(check_null_interval(&[&primary, &other], &params));
    art.reports.push(check_no_crossing(&primary));
    Ok(())
}

fn run_two(w: &mut OutputWriter, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let spec = WavepacketSpec::from_ratio(cfg.k0_over_sigma, cfg.sigma, 0.5)?;
    let params = SpacetimeParams::new(cfg.mass)?;
    let bundle = run_two_photon_ensemble(&ensemble(cfg), &spec, &params)
        .context("integrating the pair ensemble")?;
    w.write("trajectories.csv", trajectories_csv(&bundle).as_bytes())?;
    art.trajectory_counts = Some(counts(&bundle));

    let window = fixed_window(cfg).unwrap_or_else(|| default_pair_window(&spec, cfg.t0, cfg.t1));
    let rows: Vec<_> = cfg
        .frame_times()
        .into_iter()
        .flat_map(|t| joint_density_grid(t, window, cfg.joint_grid, &spec))
        .collect();
    w.write("density.csv", joint_density_csv(&rows).as_bytes())?;

    let cloud = sample_initial_two(
        cfg.t0,
        &spec,
        cfg.n_transport,
        cfg.sampling,
        cfg.seed,
        bundle.info.window,
        cfg.resolution_2d,
        cfg.pair_density,
    )?;
    art.reports.extend(check_null_interval(&[&bundle], &params));
    art.reports.push(check_exchange_samples(&cloud));
    let events = random_events(
        cfg.n_events,
        &[cfg.t0, 0.5 * (cfg.t0 + cfg.t1)],
        2.5 / cfg.sigma,
        cfg.seed,
    );
    art.reports.push(check_exchange_pointwise(&spec, &events));
    Ok(())
}

fn run_field(w: &mut OutputWriter, cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let spec = WavepacketSpec::from_ratio(cfg.k0_over_sigma, cfg.sigma, cfg.alpha)?;
    let params = SpacetimeParams::new(cfg.mass)?;
    let window = fixed_window(cfg).unwrap_or_else(|| default_window(&spec, cfg.t0, cfg.t1));
    single_density(w, cfg, &spec, &params, window)?;
    art.reports.push(check_superluminal(
        &spec,
        &params,
        &cfg.frame_times(),
        window,
        cfg.resolution,
    ));
    Ok(())
}

pub fn suite_config(cfg: &RunConfig) -> SuiteConfig {
    SuiteConfig {
        mass: cfg.mass,
        sigma: cfg.sigma,
        k0_over_sigma: cfg.k0_over_sigma,
        two_photon_k0_over_sigma: cfg.k0_over_sigma_two,
        seed: cfg.seed,
        n_traj: cfg.n_traj,
        n_transport: cfg.n_transport,
        n_events: cfg.n_events,
        t0: cfg.t0,
        t1: cfg.t1,
        tolerances: tolerances(cfg),
        node_floor: cfg.node_floor,
        resolution: cfg.resolution,
        resolution_2d: cfg.resolution_2d,
    }
}

/// `key = value` rendering of the resolved config, readable back by the parser.
pub fn config_text(cfg: &RunConfig) -> String {
    let value = serde_json::to_value(cfg).unwrap_or_default();
    let mut s = String::new();
    for (key, _) in KEYS {
        let Some(v) = value.get(*key) else { continue };
        let text = match v {
            serde_json::Value::String(x) => x.clone(),
            serde_json::Value::Array(xs) => xs
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
            other => other.to_string(),
        };
        s.push_str(&format!("{key} = {text}\n"));
    }
    s
}

/// Runs the configured scenario, writing every file into `cfg.output_dir`.
///
/// The manifest is always written when the directory is writable, including
/// after a failure part-way through.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    let mut w = OutputWriter::new(&cfg.output_dir)
        .with_context(|| format!("creating output directory {}", cfg.output_dir.display()))?;
    let mut art = Artifacts::default();
    let result = match cfg.scenario {
        Scenario::Single => run_single(&mut w, cfg, &mut art),
        Scenario::TwoPhoton => run_two(&mut w, cfg, &mut art),
        Scenario::Field => run_field(&mut w, cfg, &mut art),
        Scenario::Verify => run_suite(&suite_config(cfg))
            .map(|r| art.reports = r)
            .map_err(anyhow::Error::from),
    };
    let error = result.err().map(|e| format!("{e:#}"));
    if let Some(e) = &error {
        log::error!("{e}");
    }
    if error.is_none() || !art.reports.is_empty() {
        w.write("report.json", to_json(&art.reports)?.as_bytes())?;
    }
    let status = if error.is_some() {
        RunStatus::Error
    } else if art.reports.iter().any(CheckReport::failed) {
        RunStatus::ChecksFailed
    } else {
        RunStatus::Ok
    };

    let checks: Vec<_> = art
        .reports
        .iter()
        .map(|r| {
            json!({
                "family": r.family,
                "name": r.name,
                "status": r.status,
                "max_error": r.max_error,
                "tolerance": r.tolerance,
            })
        })
        .collect();
    let wall_clock = cfg.record_timing.then(|| started.elapsed().as_secs_f64());
    let manifest = json!({
        "tool": "weaktraj",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": cfg.scenario,
        "status": status,
        "error": error,
        "config": cfg,
        "config_text": config_text(cfg),
        "wall_clock_seconds": wall_clock,
        "checks": checks,
        "trajectories": art.trajectory_counts,
        "files": w.hashes(),
    });
    w.write_unhashed("manifest.json", to_json(&manifest)?.as_bytes())?;

    for r in &art.reports {
        let line = format!(
            "{:<24} {:<40} {:<22} max_error = {:e} (tol {:e})",
            r.family, r.name, r.status, r.max_error, r.tolerance
        );
        match r.status {
            CheckStatus::Fail => log::warn!("{line}"),
            _ => log::info!("{line}"),
        }
    }
    Ok(RunOutcome {
        status,
        reports: art.reports,
        error,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_round_trips() {
        let cfg = RunConfig::from_text(
            "alpha = 0.25\nwindow = -9,9\nroute = metric-null\n",
            Some(Scenario::Field),
        )
        .unwrap();
        let again = RunConfig::from_text(&config_text(&cfg), None).unwrap();
        assert_eq!(
            RunConfig {
                output_dir: cfg.output_dir.clone(),
                ..again
            },
            cfg
        );
    }

    #[test]
    fn field_run_writes_files_and_passes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg =
            RunConfig::from_text("frames = 3\nresolution = 257\n", Some(Scenario::Field)).unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let out = run(&cfg).unwrap();
        assert_eq!(out.status, RunStatus::Ok);
        for f in ["density.csv", "report.json", "manifest.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert!(manifest["files"]["density.csv"].is_string());
        assert!(manifest["wall_clock_seconds"].is_null());
        assert_eq!(manifest["config"]["route"], "kg-current");
    }

    #[test]
    fn runtime_error_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::from_text(
            "window = 400,401\nn_traj = 4\nn_times = 3\n",
            Some(Scenario::Single),
        )
        .unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let out = run(&cfg).unwrap();
        assert_eq!(out.status, RunStatus::Error);
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["status"], "error");
        assert!(!manifest["error"].as_str().unwrap().is_empty());
    }
}
