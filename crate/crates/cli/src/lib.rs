//! Configuration, snapshot I/O, the time-stepping driver and experiment
//! suites behind the `trsw` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod run;
pub mod snapshot;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use run::{run, RunSummary, Simulation};
pub use snapshot::Snapshot;
