//! Dissipative dynamics and quantum-synchronization diagnostics of a qubit
//! moving through a leaky cavity.
//!
//! The survival amplitude of the excited state is a sum of three complex
//! exponentials whose rates solve a cubic characteristic equation
//! ([`amplitude`]); an independent integro-differential integrator
//! ([`oracle`]) serves as ground truth. Phase-space observables (Husimi Q,
//! the synchronization measure S, peak-phase tracking) live in [`state`],
//! figure-reproduction sweeps in [`experiments`], and the command-line
//! surface in [`cli`].

pub mod amplitude;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod output;
pub mod params;
pub mod state;
pub mod verify;

pub use error::{AmplitudeError, ExperimentError, OracleError, ParamError, StateError};
pub use params::{InitialQubitState, PhysicalParams, ScaledParams};
