use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ParamError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("beta must lie in [0, 1), got {value}")]
    BetaOutOfRange { value: f64 },
    #[error("initial state amplitudes are the zero vector")]
    ZeroState,
    #[error("config error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Error)]
pub enum AmplitudeError {
    /// Roots too close for the partial-fraction residues; the caller should
    /// evaluate through the integro-differential oracle instead.
    #[error("near-degenerate cubic roots (min separation {min_separation:e}); evaluate via the oracle")]
    DegenerateRoots { min_separation: f64 },
    /// A root with positive real part means the coefficients or the solve
    /// are wrong; all physical modes decay.
    #[error("unstable root {root} (positive real part); coefficient or solver bug upstream")]
    UnstableRoot { root: Complex64 },
}

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("integrator step size underflow at tau = {tau}")]
    StepSizeUnderflow { tau: f64 },
    #[error("trajectory grids differ in length: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("invalid tau grid: {0}")]
    BadGrid(String),
}

#[derive(Debug, Clone, Error)]
pub enum StateError {
    #[error("|E| = {abs_e} materially exceeds 1; unphysical amplitude from upstream")]
    UnphysicalAmplitude { abs_e: f64 },
    #[error("{name} = {value} outside its domain")]
    AngleOutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("bundles are not comparable: {0}")]
    NotComparable(String),
}
