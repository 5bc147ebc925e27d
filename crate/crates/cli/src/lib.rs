//! Batch front-end for the SBEN solvers: JSON run configs, CSV/JSON
//! artifacts, audits and solver comparisons.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{audit, compare, output_root, run, run_batch, sweep, AuditReport, Comparison, Summary, SweepRow, OUTPUT_ROOT_VAR};
pub use config::{load_config, parse_config, Format, OutputConfig, RunConfig, ScenarioConfig, SolverConfig, TimeConfig};
pub use error::{CliError, ConfigError};
