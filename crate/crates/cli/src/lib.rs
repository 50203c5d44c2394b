//! Scenario runner for the `swdiv` engine: reads declarative scenario files,
//! evaluates exact and asymptotic level crossing statistics, optionally
//! simulates them, and writes CSV curves with a run report.

pub mod error;
pub mod figures;
pub mod run;
pub mod scenario;

pub use error::{CliError, Result};
pub use run::{run_scenario, RunOptions, RunSummary};
pub use scenario::{parse_scenario, Scenario};
