//! Argument parsing and exit codes.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigError, Origin, RawConfig, RunConfig, Scenario};
use crate::run::run;

/// Exit code for invalid configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when the run itself could not finish.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "weaktraj",
    version,
    about = "Photon trajectories from weak-valued currents around a Schwarzschild black hole"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-photon ensemble with route comparison.
    Single(Flags),
    /// Two-photon ensemble and joint density.
    TwoPhoton(Flags),
    /// Density and velocity field snapshots.
    Field(Flags),
    /// Full verification suite.
    Verify(Flags),
}

/// Values are kept as text and validated with the same rules as the config file.
#[derive(Debug, Args)]
pub struct Flags {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// kg-current | metric-null
    #[arg(long)]
    pub route: Option<String>,
    /// quantile | pseudorandom
    #[arg(long)]
    pub sampling: Option<String>,
    #[arg(long)]
    pub k0_over_sigma: Option<String>,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub t0: Option<String>,
    #[arg(long)]
    pub t1: Option<String>,
    #[arg(long)]
    pub n_traj: Option<String>,
    #[arg(long)]
    pub resolution: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<String>,
    /// Any config key, e.g. `--set frames=5`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Command {
    fn split(self) -> (Scenario, Flags) {
        match self {
            Self::Single(f) => (Scenario::Single, f),
            Self::TwoPhoton(f) => (Scenario::TwoPhoton, f),
            Self::Field(f) => (Scenario::Field, f),
            Self::Verify(f) => (Scenario::Verify, f),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SetupError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("--set expects KEY=VALUE, found `{0}`")]
    SetSyntax(String),
}

/// Builds the resolved config from a file plus flags; flags take precedence.
pub fn resolve(scenario: Scenario, flags: &Flags) -> Result<RunConfig, SetupError> {
    let mut raw = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| SetupError::Read {
                path: path.clone(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let named = [
        ("alpha", &flags.alpha),
        ("mass", &flags.mass),
        ("seed", &flags.seed),
        ("route", &flags.route),
        ("sampling", &flags.sampling),
        ("k0_over_sigma", &flags.k0_over_sigma),
        ("sigma", &flags.sigma),
        ("t0", &flags.t0),
        ("t1", &flags.t1),
        ("n_traj", &flags.n_traj),
        ("resolution", &flags.resolution),
        ("output_dir", &flags.out),
    ];
    for (key, value) in named {
        if let Some(v) = value {
            raw.push(key, v, Origin::Flag)?;
        }
    }
    for kv in &flags.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| SetupError::SetSyntax(kv.clone()))?;
        raw.push(k.trim(), v.trim(), Origin::Flag)?;
    }
    Ok(RunConfig::resolve(&raw, Some(scenario))?)
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let (scenario, flags) = cli.command.split();
    let cfg = match resolve(scenario, &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            if let Some(e) = &outcome.error {
                eprintln!("error: {e}");
            }
            let failed = outcome.reports.iter().filter(|r| r.failed()).count();
            println!(
                "{}: {} checks, {} failed; outputs in {}",
                scenario.name(),
                outcome.reports.len(),
                failed,
                cfg.output_dir.display()
            );
            outcome.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}
