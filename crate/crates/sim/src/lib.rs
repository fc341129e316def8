//! Scenario files, CSV output and the batch command line around `dat-core`.

pub mod cli;
pub mod config;
pub mod summary;
pub mod trajectory;

pub use cli::run_cli;
pub use config::{parse_scenario, ConfigError, ScenarioConfig};
pub use trajectory::Table;
