//! Explicit time stepping of the Muskat equation with structural monitors:
//! maximum principles, Lipschitz tracking, the modulus comparison and
//! crossing detection.

pub mod crossing;
pub mod initial;
pub mod monitors;
pub mod run;
pub mod stepper;

pub use crossing::{contradiction_chain, detect_crossing, ChainVerdict, CrossingReport, GradientMatch, SideCondition, CROSSING_SLACK};
pub use initial::{fixture_field, initial_field, mode_field, random_lipschitz_field};
pub use monitors::{lipschitz_norm, lipschitz_norm_spectral, modulus_monitor, ModulusCheck, MonitorSettings, PairScan};
pub use run::{
    breakthrough_detect, run_to_dir, step, sup_norm_monitor, Checkpoint, MonitorLog, MonitorRecord, RunState, RunStatus, RunSummary,
    Simulation,
};
pub use stepper::{measured_strength, stability_bound, StepDiagnostics, Stepper};
