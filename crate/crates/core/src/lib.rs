//! Simulation toolkit for nuclear frequency-comb pulse memories.
//!
//! Pipeline: isotope record → Zeeman (or Doppler/synthetic) comb → layered
//! absorber stack → linear time-domain propagation with optional mid-run
//! spectral flip → echo metrics, with an independent frequency-domain filter
//! and closed-form expressions as cross-checks, and a parallel sweep driver
//! on top.

pub mod angular;
pub mod comb;
pub mod constants;
pub mod engine;
pub mod error;
pub mod isotope;
pub mod medium;
pub mod metrics;
pub mod scenario;
pub mod spectral;
pub mod sweep;
pub mod waveform;

pub use comb::{build_comb, CombSpec, CombTooth};
pub use engine::{
    convergence_check, simulate, simulate_on_demand, simulate_with, EngineConfig, SimResult,
    SwitchEvent, SwitchKind,
};
pub use error::{Error, Result};
pub use isotope::{builtin_isotopes, find_isotope, load_isotope_table, IsotopeParams};
pub use medium::{MediumSegment, MediumStack, SegmentTooth};
pub use metrics::{detect_echo, efficiency, fidelity, gaussian_input, matched_duration, EchoReport};
pub use scenario::{
    build_scenario, run_scenario, CombSource, LossModel, Protocol, Scenario, ScenarioRun,
    ScenarioSpec,
};
pub use spectral::{analytic_echo, predetermined_efficiency, respond, transfer_function};
pub use sweep::{find_optimum, run_sweep, sweep_to_csv, sweep_to_json, SweepPlan, SweepResult};
pub use waveform::{field_fwhm, TimeGrid, Waveform};

pub use num_complex::Complex64;
