//! Configuration, subcommands and report output.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

pub use commands::{execute, run_sweep, Outcome};
pub use config::{parse_config, Cli, Command, RunConfig};
pub use report::{emit_csv, emit_report, to_json, Report, Table};
pub use verify::{run_verify, Check, VerifyReport};
