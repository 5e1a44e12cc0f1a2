//! Flat `key = value` run configuration.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use weaktraj::dynamics::{PairDensity, Route, Sampling};

pub const OUT_ENV: &str = "WEAKTRAJ_OUT";
pub const DEFAULT_OUT: &str = "weaktraj-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Single,
    TwoPhoton,
    Field,
    Verify,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::TwoPhoton => "two-photon",
            Self::Field => "field",
            Self::Verify => "verify",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "single" => Self::Single,
            "two-photon" => Self::TwoPhoton,
            "field" => Self::Field,
            "verify" => Self::Verify,
            _ => return None,
        })
    }
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Line(n) => write!(f, "line {n}"),
            Self::Flag => f.write_str("command line"),
            Self::Default => f.write_str("defaults"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: Origin, text: String },
    #[error("{origin}: unknown key `{key}`; accepted keys: {accepted}")]
    UnknownKey {
        origin: Origin,
        key: String,
        accepted: String,
    },
    #[error("{origin}: key `{key}` given twice")]
    Duplicate { origin: Origin, key: String },
    #[error("{origin}: {key} = {value} is not valid; accepted: {accepted}")]
    Invalid {
        origin: Origin,
        key: String,
        value: String,
        accepted: String,
    },
    #[error("{origin}: t1 = {t1} must exceed t0 = {t0}")]
    Span { origin: Origin, t0: f64, t1: f64 },
}

/// `(name, accepted range or values)` of every key, in manifest order.
pub const KEYS: &[(&str, &str)] = &[
    ("scenario", "single | two-photon | field | verify"),
    ("mass", "finite real >= 0"),
    ("k0_over_sigma", "finite real > 0"),
    ("k0_over_sigma_two", "finite real > 0"),
    ("sigma", "finite real > 0"),
    ("alpha", "real in [0, 1]"),
    ("t0", "finite real"),
    ("t1", "finite real > t0"),
    ("n_traj", "integer in [1, 1000000]"),
    ("n_times", "integer in [2, 100000]"),
    ("frames", "integer in [1, 1000]"),
    ("seed", "unsigned 64-bit integer"),
    ("sampling", "quantile | pseudorandom"),
    ("route", "kg-current | metric-null"),
    ("pair_density", "amplitude | current"),
    ("window", "auto | lo,hi with lo < hi"),
    ("resolution", "integer in [2, 10000000]"),
    ("resolution_2d", "integer in [2, 4096]"),
    ("joint_grid", "integer in [2, 2048]"),
    ("rtol", "real in (0, 1)"),
    ("atol", "real in (0, 1)"),
    ("node_floor", "real in [0, 1)"),
    ("n_events", "integer in [1, 1000000]"),
    ("n_transport", "integer in [1, 1000000]"),
    ("record_timing", "true | false"),
    ("output_dir", "path"),
];

/// Settings as given, before scenario-dependent defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawConfig {
    entries: Vec<(String, String, Origin)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::Line(i + 1);
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    origin,
                    text: line.trim().to_string(),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax {
                    origin,
                    text: line.trim().to_string(),
                });
            }
            if raw
                .entries
                .iter()
                .any(|(key, _, o)| key == k && matches!(o, Origin::Line(_)))
            {
                return Err(ConfigError::Duplicate {
                    origin,
                    key: k.to_string(),
                });
            }
            raw.push(k, v, origin)?;
        }
        Ok(raw)
    }

    /// Adds a setting; later settings override earlier ones.
    pub fn push(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey {
                origin,
                key: key.to_string(),
                accepted: KEYS.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", "),
            });
        }
        self.entries
            .push((key.to_string(), value.to_string(), origin));
        Ok(())
    }

    fn last(&self, key: &str) -> Option<(&str, &Origin)> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, o)| (v.as_str(), o))
    }
}

fn accepted(key: &str) -> String {
    KEYS.iter()
        .find(|(k, _)| *k == key)
        .map_or_else(String::new, |(_, a)| a.to_string())
}

fn invalid(key: &str, value: &str, origin: &Origin) -> ConfigError {
    ConfigError::Invalid {
        origin: origin.clone(),
        key: key.to_string(),
        value: value.to_string(),
        accepted: accepted(key),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WindowSetting {
    Auto(&'static str),
    Fixed([f64; 2]),
}

/// Fully resolved configuration; serialised into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub mass: f64,
    pub k0_over_sigma: f64,
    pub k0_over_sigma_two: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub t0: f64,
    pub t1: f64,
    pub n_traj: usize,
    pub n_times: usize,
    pub frames: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub route: Route,
    pub pair_density: PairDensity,
    pub window: WindowSetting,
    pub resolution: usize,
    pub resolution_2d: usize,
    pub joint_grid: usize,
    pub rtol: f64,
    pub atol: f64,
    pub node_floor: f64,
    pub n_events: usize,
    pub n_transport: usize,
    pub record_timing: bool,
    /// Not part of the manifest: it does not affect any emitted content.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn real(&self, key: &str, default: f64, ok: impl Fn(f64) -> bool) -> Result<f64, ConfigError> {
        match self.raw.last(key) {
            None => Ok(default),
            Some((v, o)) => match v.parse::<f64>() {
                Ok(x) if ok(x) => Ok(x),
                _ => Err(invalid(key, v, o)),
            },
        }
    }

    fn int(&self, key: &str, default: u64, lo: u64, hi: u64) -> Result<u64, ConfigError> {
        match self.raw.last(key) {
            None => Ok(default),
            Some((v, o)) => match v.parse::<u64>() {
                Ok(x) if (lo..=hi).contains(&x) => Ok(x),
                _ => Err(invalid(key, v, o)),
            },
        }
    }

    fn choice<T: Copy>(
        &self,
        key: &str,
        default: T,
        options: &[(&str, T)],
    ) -> Result<T, ConfigError> {
        match self.raw.last(key) {
            None => Ok(default),
            Some((v, o)) => options
                .iter()
                .find(|(name, _)| *name == v)
                .map(|(_, t)| *t)
                .ok_or_else(|| invalid(key, v, o)),
        }
    }
}

impl RunConfig {
    /// Applies defaults for `scenario` under the settings in `raw`.
    ///
    /// A `scenario` key in `raw` is only used when `scenario` is `None`.
    pub fn resolve(raw: &RawConfig, scenario: Option<Scenario>) -> Result<Self, ConfigError> {
        let r = Reader { raw };
        let scenario = match (scenario, raw.last("scenario")) {
            (Some(s), _) => s,
            (None, Some((v, o))) => Scenario::parse(v).ok_or_else(|| invalid("scenario", v, o))?,
            (None, None) => {
                return Err(ConfigError::Invalid {
                    origin: Origin::Default,
                    key: "scenario".into(),
                    value: "(missing)".into(),
                    accepted: accepted("scenario"),
                })
            }
        };
        let fin = |x: f64| x.is_finite();
        let pos = |x: f64| x.is_finite() && x > 0.0;
        let (t0_default, t1_default) = match scenario {
            Scenario::TwoPhoton => (-1.0, 1.0),
            _ => (-3.0, 3.0),
        };
        let k0_default = if scenario == Scenario::TwoPhoton {
            20.0
        } else {
            15.0
        };
        let t0 = r.real("t0", t0_default, fin)?;
        let t1 = r.real("t1", t1_default, fin)?;
        if t1 <= t0 {
            let origin = raw
                .last("t1")
                .or(raw.last("t0"))
                .map_or(Origin::Default, |(_, o)| o.clone());
            return Err(ConfigError::Span { origin, t0, t1 });
        }
        let window = match raw.last("window") {
            None => WindowSetting::Auto("auto"),
            Some(("auto", _)) => WindowSetting::Auto("auto"),
            Some((v, o)) => {
                let parts: Vec<Option<f64>> =
                    v.split(',').map(|p| p.trim().parse::<f64>().ok()).collect();
                match parts.as_slice() {
                    [Some(lo), Some(hi)] if lo.is_finite() && hi.is_finite() && lo < hi => {
                        WindowSetting::Fixed([*lo, *hi])
                    }
                    _ => return Err(invalid("window", v, o)),
                }
            }
        };
        let record_timing =
            r.choice("record_timing", false, &[("true", true), ("false", false)])?;
        let output_dir = match raw.last("output_dir") {
            Some((v, _)) => PathBuf::from(v),
            None => {
                std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
            }
        };
        Ok(Self {
            scenario,
            mass: r.real("mass", 1.0, |x| x.is_finite() && x >= 0.0)?,
            k0_over_sigma: r.real("k0_over_sigma", k0_default, pos)?,
            k0_over_sigma_two: r.real("k0_over_sigma_two", 20.0, pos)?,
            sigma: r.real("sigma", 1.0, pos)?,
            alpha: r.real("alpha", 0.5, |x| (0.0..=1.0).contains(&x))?,
            t0,
            t1,
            n_traj: r.int("n_traj", 200, 1, 1_000_000)? as usize,
            n_times: r.int("n_times", 121, 2, 100_000)? as usize,
            frames: r.int("frames", 7, 1, 1000)? as usize,
            seed: r.int("seed", 0, 0, u64::MAX)?,
            sampling: r.choice(
                "sampling",
                Sampling::Quantile,
                &[
                    ("quantile", Sampling::Quantile),
                    ("pseudorandom", Sampling::Pseudorandom),
                ],
            )?,
            route: r.choice(
                "route",
                Route::KgCurrent,
                &[
                    ("kg-current", Route::KgCurrent),
                    ("metric-null", Route::MetricNull),
                ],
            )?,
            pair_density: r.choice(
                "pair_density",
                PairDensity::Amplitude,
                &[
                    ("amplitude", PairDensity::Amplitude),
                    ("current", PairDensity::Current),
                ],
            )?,
            window,
            resolution: r.int("resolution", 2048, 2, 10_000_000)? as usize,
            resolution_2d: r.int("resolution_2d", 512, 2, 4096)? as usize,
            joint_grid: r.int("joint_grid", 128, 2, 2048)? as usize,
            rtol: r.real("rtol", 1e-9, |x| x > 0.0 && x < 1.0)?,
            atol: r.real("atol", 1e-12, |x| x > 0.0 && x < 1.0)?,
            node_floor: r.real("node_floor", weaktraj::currents::DEFAULT_NODE_FLOOR, |x| {
                (0.0..1.0).contains(&x)
            })?,
            n_events: r.int("n_events", 1000, 1, 1_000_000)? as usize,
            n_transport: r.int("n_transport", 5000, 1, 1_000_000)? as usize,
            record_timing,
            output_dir,
        })
    }

    pub fn from_text(text: &str, scenario: Option<Scenario>) -> Result<Self, ConfigError> {
        Self::resolve(&RawConfig::parse(text)?, scenario)
    }

    /// Time at which the `i`-th of `frames` density snapshots is taken.
    pub fn frame_times(&self) -> Vec<f64> {
        if self.frames == 1 {
            return vec![self.t0];
        }
        weaktraj::dynamics::output_times(self.t0, self.t1, self.frames)
    }
}
