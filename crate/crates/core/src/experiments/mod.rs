//! Config-driven sweeps over partition families, with CSV/JSON/plot output
//! and the identity verification suite.

pub mod config;
pub mod output;
pub mod runner;
pub mod verify;

pub use config::{ExperimentConfig, SCHEMA_VERSION};
pub use output::{emit, CSV_HEADER};
pub use runner::{
    baseline, farfield_points, fit_power, fit_rate, richardson_baseline, run, BaselineCache, ExperimentRecord, Field, Fit,
    Richardson, RunOutput,
};
pub use verify::{verify_suite, VerifyReport};
