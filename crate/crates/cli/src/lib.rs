//! Scenario runner for the `kzstring` library: configuration parsing, the
//! `simulate`/`verify`/`compare`/`kzmap` pipelines and their file output.

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::{ConfigError, ScenarioConfig};
pub use output::Summary;
pub use pipeline::{run_compare, run_kzmap, run_simulate, run_verify, Outcome, RunError};
