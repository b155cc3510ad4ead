//! Scenario runner for the generator case studies: config parsing, the bound pipeline,
//! and CSV/SVG output.

pub mod error;
pub mod output;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use run::{run_batch, run_scenario, run_scenario_seeded, BoundSummary, RunReport};
pub use scenario::{builtin_scenarios, Scenario};
