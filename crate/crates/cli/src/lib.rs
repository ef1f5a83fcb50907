//! Configuration, orchestration and file output behind the `aggrekin` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{ConfigError, ConfigKeys, RunKind, SimConfig};
pub use run::{run_aggregate, run_kinetic, run_study, scenario_table, StudyRow};
