//! Scenario orchestration for the gammalab crates: a flat `key = value`
//! configuration, a staged pipeline from layer constants to dynamics, an
//! append-only result store with a hashed manifest, and SVG plots.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod plots;
pub mod store;

pub use config::{builtin, ScenarioConfig, Stage};
pub use error::{ConfigError, Error, Result};
pub use pipeline::run_scenario;
pub use plots::{emit_plots, PlotOutcome};
pub use store::{ResultStore, Table};
