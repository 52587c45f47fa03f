//! Declarative experiment harness: parameter sweeps over (beta, delta),
//! phase-space snapshots, synchronization traces, and trend analysis.
//!
//! Each (beta, delta, tau) combination is an independent work item; the
//! harness evaluates them in a parallel pool and collects results in
//! manifest order, so a run is deterministic for a given config.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{eval_amplitude_grid, AmplitudeSolution};
use crate::error::{AmplitudeError, ExperimentError};
use crate::oracle::{max_divergence, reduce_kernel, solve_volterra};
use crate::params::{ConfigFile, InitialQubitState, PhysicalParams, ScaledParams};
use crate::state::{
    density_matrix, husimi_grid, husimi_q, track_peak_phase, DensityMatrix, PhaseSpaceGrid,
    SyncTrace,
};

/// Locking predicate: peak phase within this many radians of the locked value.
pub const LOCKING_PHASE_TOL: f64 = 0.2;
/// Peak heights below this count as "uniform phase distribution".
pub const DECOHERENCE_THRESHOLD: f64 = 1e-3;
/// Analytic-vs-oracle bound applied to the spot-checked combinations.
pub const DIVERGENCE_BOUND: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRange {
    pub stop: f64,
    pub step: f64,
}

/// Declarative description of one experiment. Loaded from JSON; unknown keys
/// are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub lambda: f64,
    /// Defaults to 1.5e9 * gamma.
    pub omega0: Option<f64>,
    #[serde(default = "default_amp")]
    pub c0_re: f64,
    #[serde(default)]
    pub c0_im: f64,
    #[serde(default = "default_amp")]
    pub c1_re: f64,
    #[serde(default)]
    pub c1_im: f64,
    /// Sweep axis of qubit speeds.
    #[serde(default)]
    pub beta_values: Vec<f64>,
    /// Sweep axis of detunings, in units of gamma via delta = x3 * gamma.
    #[serde(default)]
    pub delta_values: Vec<f64>,
    /// Explicit (beta, delta) pairs; overrides the Cartesian product of the
    /// two axes when present.
    pub settings: Option<Vec<(f64, f64)>>,
    pub tau_list: Option<Vec<f64>>,
    pub tau_range: Option<TauRange>,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_phi")]
    pub n_phi: usize,
    #[serde(default = "default_phi_probes")]
    pub phi_probes: Vec<f64>,
}

fn default_label() -> String {
    "experiment".into()
}
fn default_gamma() -> f64 {
    1.0
}
fn default_amp() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}
fn default_n_theta() -> usize {
    64
}
fn default_n_phi() -> usize {
    128
}
fn default_phi_probes() -> Vec<f64> {
    vec![0.0]
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.tau_list.is_none() && self.tau_range.is_none() {
            return Err(ExperimentError::Config(
                "one of tau_list / tau_range is required".into(),
            ));
        }
        if let Some(r) = &self.tau_range {
            if !(r.stop > 0.0) || !(r.step > 0.0) {
                return Err(ExperimentError::Config("tau_range must be positive".into()));
            }
        }
        if let Some(l) = &self.tau_list {
            if l.is_empty() || l.windows(2).any(|w| w[1] <= w[0]) || l[0] < 0.0 {
                return Err(ExperimentError::Config(
                    "tau_list must be non-empty, increasing and non-negative".into(),
                ));
            }
        }
        if self.settings().is_empty() {
            return Err(ExperimentError::Config("empty sweep".into()));
        }
        if self.n_theta < 2 || self.n_phi < 2 {
            return Err(ExperimentError::Config("grid must be at least 2 x 2".into()));
        }
        Ok(())
    }

    /// The (beta, delta) combinations of this sweep, in manifest order.
    pub fn settings(&self) -> Vec<(f64, f64)> {
        if let Some(s) = &self.settings {
            return s.clone();
        }
        let mut out = Vec::new();
        for &beta in &self.beta_values {
            for &delta in &self.delta_values {
                out.push((beta, delta));
            }
        }
        out
    }

    pub fn initial_state(&self) -> Result<InitialQubitState, ExperimentError> {
        Ok(InitialQubitState::new(
            Complex64::new(self.c0_re, self.c0_im),
            Complex64::new(self.c1_re, self.c1_im),
        )?)
    }

    pub fn scaled(&self, beta: f64, delta: f64) -> Result<ScaledParams, ExperimentError> {
        let omega0 = self.omega0.unwrap_or(1.5e9 * self.gamma);
        Ok(PhysicalParams::new(self.gamma, self.lambda, delta * self.gamma, omega0, beta)?.scale())
    }

    /// Dense tau grid for traces: the range if present, the list otherwise.
    pub fn tau_grid(&self) -> Vec<f64> {
        if let Some(r) = &self.tau_range {
            let n = (r.stop / r.step).round() as usize;
            return (0..=n).map(|i| i as f64 * r.step).collect();
        }
        self.tau_list.clone().expect("validated")
    }

    /// Tau values at which phase-space snapshots are taken.
    pub fn snapshot_taus(&self) -> Vec<f64> {
        if let Some(l) = &self.tau_list {
            return l.clone();
        }
        self.tau_grid()
    }

    /// From a flat parameter config: a single-setting experiment.
    pub fn from_config_file(cf: &ConfigFile) -> Self {
        Self {
            label: "config".into(),
            gamma: cf.gamma,
            lambda: cf.lambda,
            omega0: cf.omega0,
            c0_re: cf.c0_re,
            c0_im: cf.c0_im,
            c1_re: cf.c1_re,
            c1_im: cf.c1_im,
            beta_values: vec![cf.beta],
            delta_values: vec![cf.delta / cf.gamma],
            settings: None,
            tau_list: None,
            tau_range: Some(TauRange { stop: 100.0, step: 0.05 }),
            n_theta: default_n_theta(),
            n_phi: default_n_phi(),
            phi_probes: default_phi_probes(),
        }
    }
}

/// Survival amplitude over a grid: closed form when the cubic roots are well
/// separated, oracle integration otherwise. Returns whether the oracle path
/// was taken.
pub fn evaluate_trajectory(
    sp: &ScaledParams,
    tau_grid: &[f64],
) -> Result<(Vec<Complex64>, bool), ExperimentError> {
    match AmplitudeSolution::from_params(sp) {
        Ok(sol) => Ok((eval_amplitude_grid(&sol, tau_grid)?, false)),
        Err(AmplitudeError::DegenerateRoots { .. }) => {
            let km = reduce_kernel(sp);
            if tau_grid.first() == Some(&0.0) {
                Ok((solve_volterra(&km, tau_grid)?, true))
            } else {
                // the oracle must start from tau = 0; prepend and drop
                let mut grid = Vec::with_capacity(tau_grid.len() + 1);
                grid.push(0.0);
                grid.extend_from_slice(tau_grid);
                let traj = solve_volterra(&km, &grid)?;
                Ok((traj[1..].to_vec(), true))
            }
        }
        Err(e) => Err(e.into()),
    }
}

/// One row of the bundle manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ComboRecord {
    pub index: usize,
    pub beta: f64,
    /// Detuning in units of gamma.
    pub delta: f64,
    pub tau: Option<f64>,
    pub used_oracle: bool,
    pub oracle_divergence: Option<f64>,
    pub status: String,
    pub output_file: Option<String>,
}

#[derive(Debug)]
pub struct Snapshot {
    pub grid: PhaseSpaceGrid,
    pub rho: DensityMatrix,
    pub peak_phase: Option<f64>,
    pub peak_height: f64,
}

#[derive(Debug)]
pub struct Trace {
    pub sync: SyncTrace,
    /// Q at the initial-peak probe (theta = pi/2, phi = 0) over time.
    pub q_equator: Vec<f64>,
    /// Q at the pole (theta = 0; phi-independent) over time.
    pub q_pole: Vec<f64>,
}

/// Results of one experiment run, manifest order preserved.
#[derive(Debug)]
pub struct FigureBundle {
    pub id: String,
    pub manifest: Vec<ComboRecord>,
    pub snapshots: Vec<Option<Snapshot>>,
    pub traces: Vec<Option<Trace>>,
    /// The beta/delta setting behind each result row.
    pub combo_params: Vec<(f64, f64, Option<f64>)>,
}

fn peak_of(rho: &DensityMatrix) -> (Option<f64>, f64) {
    let mag = rho.rho_eg.norm();
    let phase = if mag < crate::state::PEAK_UNDEFINED_TOL {
        None
    } else {
        Some((-rho.rho_eg.arg()).rem_euclid(std::f64::consts::TAU))
    };
    (phase, mag / 4.0)
}

/// Husimi snapshots for every (setting, tau) combination.
pub fn run_snapshot_experiment(cfg: &ExperimentConfig) -> Result<FigureBundle, ExperimentError> {
    cfg.validate()?;
    let s0 = cfg.initial_state()?;
    let settings = cfg.settings();
    let taus = cfg.snapshot_taus();

    let combos: Vec<(f64, f64, f64)> = settings
        .iter()
        .flat_map(|&(b, d)| taus.iter().map(move |&t| (b, d, t)))
        .collect();

    let results: Vec<Result<(Snapshot, bool, Option<f64>), ExperimentError>> = combos
        .par_iter()
        .enumerate()
        .map(|(i, &(beta, delta, tau))| {
            let sp = cfg.scaled(beta, delta)?;
            let grid = if tau > 0.0 {
                vec![0.0, tau]
            } else {
                vec![0.0]
            };
            let (traj, used_oracle) = evaluate_trajectory(&sp, &grid)?;
            let e = *traj.last().unwrap();
            // spot-check the first combination against the oracle
            let divergence = if i == 0 && !used_oracle {
                let km = reduce_kernel(&sp);
                let check = solve_volterra(&km, &grid)?;
                Some(max_divergence(&traj, &check)?)
            } else {
                None
            };
            let rho = density_matrix(&s0, e)?;
            let husimi = husimi_grid(&rho, cfg.n_theta, cfg.n_phi, tau);
            let (peak_phase, peak_height) = peak_of(&rho);
            Ok((
                Snapshot { grid: husimi, rho, peak_phase, peak_height },
                used_oracle,
                divergence,
            ))
        })
        .collect();

    let mut manifest = Vec::with_capacity(combos.len());
    let mut snapshots = Vec::with_capacity(combos.len());
    let mut combo_params = Vec::with_capacity(combos.len());
    for (i, (&(beta, delta, tau), res)) in combos.iter().zip(results).enumerate() {
        let (snapshot, used_oracle, divergence, status) = match res {
            Ok((s, o, d)) => (Some(s), o, d, "ok".to_string()),
            Err(e) => (None, false, None, format!("error: {e}")),
        };
        manifest.push(ComboRecord {
            index: i,
            beta,
            delta,
            tau: Some(tau),
            used_oracle,
            oracle_divergence: divergence,
            status,
            output_file: None,
        });
        snapshots.push(snapshot);
        combo_params.push((beta, delta, Some(tau)));
    }
    Ok(FigureBundle {
        id: cfg.label.clone(),
        manifest,
        snapshots,
        traces: Vec::new(),
        combo_params,
    })
}

/// Synchronization traces plus the two Q probe curves per setting.
pub fn run_trace_experiment(cfg: &ExperimentConfig) -> Result<FigureBundle, ExperimentError> {
    cfg.validate()?;
    let s0 = cfg.initial_state()?;
    let settings = cfg.settings();
    let tau_grid = cfg.tau_grid();

    let results: Vec<Result<(Trace, bool, Option<f64>), ExperimentError>> = settings
        .par_iter()
        .enumerate()
        .map(|(i, &(beta, delta))| {
            let sp = cfg.scaled(beta, delta)?;
            let (traj, used_oracle) = evaluate_trajectory(&sp, &tau_grid)?;
            let divergence = if i == 0 && !used_oracle {
                let km = reduce_kernel(&sp);
                let check = solve_volterra(&km, &tau_grid)?;
                Some(max_divergence(&traj, &check)?)
            } else {
                None
            };
            let rhos: Vec<DensityMatrix> = traj
                .iter()
                .map(|&e| density_matrix(&s0, e))
                .collect::<Result<_, _>>()?;
            let sync = track_peak_phase(&tau_grid, &rhos, &cfg.phi_probes)?;
            let half_pi = std::f64::consts::FRAC_PI_2;
            let q_equator = rhos
                .iter()
                .map(|r| husimi_q(r, half_pi, 0.0))
                .collect::<Result<_, _>>()?;
            let q_pole = rhos
                .iter()
                .map(|r| husimi_q(r, 0.0, 0.0))
                .collect::<Result<_, _>>()?;
            Ok((Trace { sync, q_equator, q_pole }, used_oracle, divergence))
        })
        .collect();

    let mut manifest = Vec::with_capacity(settings.len());
    let mut traces = Vec::with_capacity(settings.len());
    let mut combo_params = Vec::with_capacity(settings.len());
    for (i, (&(beta, delta), res)) in settings.iter().zip(results).enumerate() {
        let (trace, used_oracle, divergence, status) = match res {
            Ok((t, o, d)) => (Some(t), o, d, "ok".to_string()),
            Err(e) => (None, false, None, format!("error: {e}")),
        };
        manifest.push(ComboRecord {
            index: i,
            beta,
            delta,
            tau: None,
            used_oracle,
            oracle_divergence: divergence,
            status,
            output_file: None,
        });
        traces.push(trace);
        combo_params.push((beta, delta, None));
    }
    Ok(FigureBundle {
        id: cfg.label.clone(),
        manifest,
        snapshots: Vec::new(),
        traces,
        combo_params,
    })
}

/// Time-averaged S(0, tau) over `[window.0, window.1]`; the operational
/// "locking score".
pub fn locking_score(trace: &SyncTrace, window: (f64, f64)) -> Result<f64, ExperimentError> {
    let probe = trace
        .phi_probes
        .iter()
        .position(|&p| p.abs() < 1e-12)
        .ok_or_else(|| ExperimentError::NotComparable("no phi = 0 probe in trace".into()))?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (tau, s) in trace.tau_grid.iter().zip(&trace.s_values[probe]) {
        if (window.0..=window.1).contains(tau) {
            sum += s;
            n += 1;
        }
    }
    if n == 0 {
        return Err(ExperimentError::NotComparable("empty averaging window".into()));
    }
    Ok(sum / n as f64)
}

/// Max minus min of S(0, tau) over the window.
pub fn oscillation_amplitude(
    trace: &SyncTrace,
    window: (f64, f64),
) -> Result<f64, ExperimentError> {
    let probe = trace
        .phi_probes
        .iter()
        .position(|&p| p.abs() < 1e-12)
        .ok_or_else(|| ExperimentError::NotComparable("no phi = 0 probe in trace".into()))?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (tau, s) in trace.tau_grid.iter().zip(&trace.s_values[probe]) {
        if (window.0..=window.1).contains(tau) {
            lo = lo.min(*s);
            hi = hi.max(*s);
        }
    }
    if !lo.is_finite() {
        return Err(ExperimentError::NotComparable("empty window".into()));
    }
    Ok(hi - lo)
}

/// True when the peak phase stays within `LOCKING_PHASE_TOL` of 0 and the
/// peak is above the decoherence threshold for every tau in the window.
pub fn is_phase_locked(trace: &SyncTrace, window: (f64, f64)) -> bool {
    let mut any = false;
    for i in 0..trace.tau_grid.len() {
        let tau = trace.tau_grid[i];
        if !(window.0..=window.1).contains(&tau) {
            continue;
        }
        any = true;
        if trace.peak_height[i] <= DECOHERENCE_THRESHOLD {
            return false;
        }
        match trace.peak_phase[i] {
            Some(phi) => {
                let wrapped = (phi + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                    - std::f64::consts::PI;
                if wrapped.abs() >= LOCKING_PHASE_TOL {
                    return false;
                }
            }
            None => return false,
        }
    }
    any
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendEntry {
    pub beta: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub entries: Vec<TrendEntry>,
    pub monotone_non_decreasing: bool,
}

/// Locking score per beta from a beta-sweep bundle at fixed detuning.
pub fn trend_report(
    bundle: &FigureBundle,
    window: (f64, f64),
) -> Result<TrendReport, ExperimentError> {
    if bundle.traces.is_empty() {
        return Err(ExperimentError::NotComparable(
            "trend analysis needs a trace bundle".into(),
        ));
    }
    let deltas: Vec<f64> = bundle.combo_params.iter().map(|c| c.1).collect();
    if deltas.windows(2).any(|w| w[0] != w[1]) {
        return Err(ExperimentError::NotComparable(
            "beta trend requires a fixed detuning".into(),
        ));
    }
    let mut entries = Vec::new();
    for (trace, combo) in bundle.traces.iter().zip(&bundle.combo_params) {
        let trace = trace.as_ref().ok_or_else(|| {
            ExperimentError::NotComparable("bundle contains failed combinations".into())
        })?;
        entries.push(TrendEntry {
            beta: combo.0,
            score: locking_score(&trace.sync, window)?,
        });
    }
    let monotone = entries.windows(2).all(|w| w[1].score >= w[0].score);
    Ok(TrendReport { entries, monotone_non_decreasing: monotone })
}

/// Built-in reproduction presets. Returns (config, wants_snapshots).
pub fn preset(name: &str) -> Option<(ExperimentConfig, bool)> {
    let base = |label: &str, lambda: f64| ExperimentConfig {
        label: label.into(),
        gamma: 1.0,
        lambda,
        omega0: Some(1.5e9),
        c0_re: default_amp(),
        c0_im: 0.0,
        c1_re: default_amp(),
        c1_im: 0.0,
        beta_values: Vec::new(),
        delta_values: Vec::new(),
        settings: None,
        tau_list: None,
        tau_range: None,
        n_theta: default_n_theta(),
        n_phi: default_n_phi(),
        phi_probes: vec![0.0, std::f64::consts::PI],
    };
    match name {
        // weak-coupling snapshots: loss of the initial phi = 0 peak
        "fig2" => {
            let mut cfg = base("fig2", 5.0);
            cfg.settings = Some(vec![(0.0, 0.0), (1e-11, 0.0), (1e-11, 5.0)]);
            cfg.tau_list = Some(vec![0.0, 3.0, 5.0]);
            Some((cfg, true))
        }
        // weak-coupling probe traces
        "fig3" => {
            let mut cfg = base("fig3", 5.0);
            cfg.settings = Some(vec![(0.0, 0.0), (1e-11, 0.0), (1e-11, 5.0)]);
            cfg.tau_range = Some(TauRange { stop: 10.0, step: 0.01 });
            Some((cfg, false))
        }
        // strong-coupling snapshots: velocity sustains the peak
        "fig4" => {
            let mut cfg = base("fig4", 0.01);
            cfg.settings = Some(vec![(1e-11, 0.0), (1e-10, 0.0), (1e-11, 0.3)]);
            cfg.tau_list = Some(vec![0.0, 100.0]);
            Some((cfg, true))
        }
        // strong-coupling probe traces
        "fig5" => {
            let mut cfg = base("fig5", 0.01);
            cfg.settings =
                Some(vec![(0.0, 0.0), (1e-10, 0.0), (3e-10, 0.0), (1e-11, 0.2)]);
            cfg.tau_range = Some(TauRange { stop: 100.0, step: 0.05 });
            Some((cfg, false))
        }
        // synchronization measure, beta sweep at two detunings
        "fig6" => {
            let mut cfg = base("fig6", 0.01);
            cfg.beta_values = vec![0.0, 1e-11, 1e-10, 3e-10];
            cfg.delta_values = vec![0.0, 0.3];
            cfg.tau_range = Some(TauRange { stop: 100.0, step: 0.05 });
            Some((cfg, false))
        }
        _ => None,
    }
}

pub const PRESET_NAMES: [&str; 5] = ["fig2", "fig3", "fig4", "fig5", "fig6"];
