//! Command-line front end.
//!
//! Subcommands: `amplitude | husimi | sync | figure | verify`. Exit codes:
//! 0 success, 1 verification failure, 2 usage/config error, 3 physicality
//! violation. `QSYNC_THREADS` caps worker parallelism.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

use crate::error::{AmplitudeError, ExperimentError, OracleError, ParamError, StateError};
use crate::experiments::{
    preset, run_snapshot_experiment, run_trace_experiment, ExperimentConfig, FigureBundle,
    PRESET_NAMES,
};
use crate::output;
use crate::params::ConfigFile;
use crate::state::{density_matrix, husimi_grid, track_peak_phase};
use crate::verify::{run_verify, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PHYSICALITY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "qsync", version, about = "Moving-qubit leaky-cavity synchronization simulator")]
pub struct Cli {
    /// Flat JSON parameter file (gamma, lambda, delta, omega0, beta, c*_re/im).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON files.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// RNG seed for the verification suite.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the survival amplitude over a tau grid.
    Amplitude {
        #[arg(long, default_value_t = 100.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.05)]
        tau_step: f64,
    },
    /// Sample the Husimi Q-function over the Bloch sphere at one time.
    Husimi {
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 64)]
        n_theta: usize,
        #[arg(long, default_value_t = 128)]
        n_phi: usize,
    },
    /// Synchronization measure trace at probe phases.
    Sync {
        /// Probe phases in radians; repeat the flag for several.
        #[arg(long = "phi", default_values_t = vec![0.0])]
        phi: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 0.05)]
        tau_step: f64,
    },
    /// Run a named figure-reproduction preset (fig2..fig6).
    Figure { preset: String },
    /// Randomized verification suite; exit 0 only if every case passes.
    Verify {
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Debug: corrupt a cubic coefficient to exercise the failure path.
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

/// Failure domain, mapped to an exit code at the boundary.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Physicality(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Physicality(_) => EXIT_PHYSICALITY,
            CliError::Verification(_) => EXIT_VERIFY_FAIL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Physicality(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io error: {e}"))
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::State(StateError::UnphysicalAmplitude { .. })
            | ExperimentError::Amplitude(AmplitudeError::UnstableRoot { .. }) => {
                CliError::Physicality(e.to_string())
            }
            ExperimentError::Oracle(OracleError::StepSizeUnderflow { .. }) => {
                CliError::Physicality(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile, CliError> {
    let path = path
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required for this command".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ConfigFile::parse(&text)?;
    let physical = cfg.physical()?;
    if let Some(w) = physical.validity_warning() {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn tau_grid(tau_max: f64, tau_step: f64) -> Result<Vec<f64>, CliError> {
    if tau_max < 0.0 || !(tau_step > 0.0) {
        return Err(CliError::Usage("tau range must be non-negative with positive step".into()));
    }
    if tau_max == 0.0 {
        return Ok(vec![0.0]);
    }
    let n = (tau_max / tau_step).round() as usize;
    Ok((0..=n).map(|i| i as f64 * tau_step).collect())
}

/// Dispatch a parsed invocation. Returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    match &cli.command {
        Command::Amplitude { tau_max, tau_step } => {
            cmd_amplitude(cli, *tau_max, *tau_step)
        }
        Command::Husimi { tau, n_theta, n_phi } => cmd_husimi(cli, *tau, *n_theta, *n_phi),
        Command::Sync { phi, tau_max, tau_step } => cmd_sync(cli, phi, *tau_max, *tau_step),
        Command::Figure { preset } => cmd_figure(cli, preset),
        Command::Verify { count, corrupt } => cmd_verify(cli, *count, *corrupt),
    }
}

fn cmd_amplitude(cli: &Cli, tau_max: f64, tau_step: f64) -> Result<Vec<PathBuf>, CliError> {
    let cfg = load_config(&cli.config)?;
    let sp = cfg.physical()?.scale();
    let grid = tau_grid(tau_max, tau_step)?;
    let (traj, _) = crate::experiments::evaluate_trajectory(&sp, &grid)?;
    for e in &traj {
        if e.norm() > 1.0 + crate::state::AMPLITUDE_TOL {
            return Err(CliError::Physicality(format!(
                "|E| = {} exceeds 1; unphysical parameters or solver defect",
                e.norm()
            )));
        }
    }
    let path = cli.out.join("amplitude.csv");
    output::write_file(&path, &output::amplitude_csv(&grid, &traj))?;
    Ok(vec![path])
}

fn cmd_husimi(cli: &Cli, tau: f64, n_theta: usize, n_phi: usize) -> Result<Vec<PathBuf>, CliError> {
    let cfg = load_config(&cli.config)?;
    if n_theta < 2 || n_phi < 2 {
        return Err(CliError::Usage("grid must be at least 2 x 2".into()));
    }
    let sp = cfg.physical()?.scale();
    let s0 = cfg.initial_state()?;
    let grid_tau = if tau > 0.0 { vec![0.0, tau] } else { vec![0.0] };
    let (traj, _) = crate::experiments::evaluate_trajectory(&sp, &grid_tau)?;
    let rho = density_matrix(&s0, *traj.last().unwrap())
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let grid = husimi_grid(&rho, n_theta, n_phi, tau);
    let path = cli.out.join("husimi.csv");
    output::write_file(&path, &output::husimi_csv(&grid))?;
    Ok(vec![path])
}

fn cmd_sync(cli: &Cli, phi: &[f64], tau_max: f64, tau_step: f64) -> Result<Vec<PathBuf>, CliError> {
    let cfg = load_config(&cli.config)?;
    let sp = cfg.physical()?.scale();
    let s0 = cfg.initial_state()?;
    let grid = tau_grid(tau_max, tau_step)?;
    let (traj, _) = crate::experiments::evaluate_trajectory(&sp, &grid)?;
    let rhos = traj
        .iter()
        .map(|&e| density_matrix(&s0, e))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Physicality(e.to_string()))?;
    let trace = track_peak_phase(&grid, &rhos, phi)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let path = cli.out.join("sync.csv");
    output::write_file(&path, &output::sync_csv(&trace))?;
    Ok(vec![path])
}

fn write_bundle(out: &Path, cfg: &ExperimentConfig, bundle: &mut FigureBundle) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.join(&bundle.id);
    let mut written = Vec::new();
    for (i, snap) in bundle.snapshots.iter().enumerate() {
        if let Some(s) = snap {
            let name = format!("{}_snapshot_{:03}.csv", bundle.id, i);
            let path = dir.join(&name);
            output::write_file(&path, &output::husimi_csv(&s.grid))?;
            bundle.manifest[i].output_file = Some(name);
            written.push(path);
        }
    }
    for (i, trace) in bundle.traces.iter().enumerate() {
        if let Some(t) = trace {
            let name = format!("{}_sync_{:03}.csv", bundle.id, i);
            let path = dir.join(&name);
            output::write_file(&path, &output::sync_csv(&t.sync))?;
            written.push(path);
            let probe_name = format!("{}_qprobe_{:03}.csv", bundle.id, i);
            let probe_path = dir.join(&probe_name);
            output::write_file(
                &probe_path,
                &output::qprobe_csv(&t.sync.tau_grid, &t.q_equator, &t.q_pole),
            )?;
            bundle.manifest[i].output_file = Some(name);
            written.push(probe_path);
        }
    }
    let manifest = serde_json::json!({
        "experiment": bundle.id,
        "label": cfg.label,
        "combinations": bundle.manifest,
    });
    let path = dir.join("manifest.json");
    output::write_file(&path, &format!("{:#}\n", manifest))?;
    written.push(path);
    Ok(written)
}

fn cmd_figure(cli: &Cli, name: &str) -> Result<Vec<PathBuf>, CliError> {
    let (cfg, snapshot) = preset(name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preset '{name}'; valid presets: {}",
            PRESET_NAMES.join(", ")
        ))
    })?;
    let mut bundle = if snapshot {
        run_snapshot_experiment(&cfg)?
    } else {
        run_trace_experiment(&cfg)?
    };
    write_bundle(&cli.out, &cfg, &mut bundle)
}

fn cmd_verify(cli: &Cli, count: usize, corrupt: bool) -> Result<Vec<PathBuf>, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let report = run_verify(&VerifyOptions { seed: cli.seed, count, corrupt });
    let rows = report.rows();
    let path = cli.out.join("verify.csv");
    output::write_file(&path, &output::verify_csv(&rows))?;
    let n_fail = report.cases.iter().filter(|c| !c.pass()).count();
    for c in report.cases.iter().filter(|c| !c.pass()) {
        eprintln!("case {}: {}", c.case_id, c.failures.join("; "));
    }
    println!(
        "verify: {}/{} cases passed (seed {})",
        count - n_fail,
        count,
        cli.seed
    );
    if n_fail > 0 {
        return Err(CliError::Verification(format!("{n_fail} case(s) failed")));
    }
    Ok(vec![path])
}
