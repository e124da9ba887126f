//! Command implementations behind the `lexdag` binary: sequence generation,
//! single runs, oracle-backed verification, and benchmark sweeps.

pub mod args;
pub mod commands;
pub mod fit;
pub mod record;
pub mod verify;

pub use commands::{cmd_bench, cmd_gen, cmd_run, cmd_verify, CliError};
pub use record::{RunRecord, CSV_HEADER};
