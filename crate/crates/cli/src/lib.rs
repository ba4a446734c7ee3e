//! Command-line front end: configuration parsing, subcommand dispatch, and
//! deterministic export of trajectories and plots.

pub mod config;
pub mod csv;
pub mod error;
pub mod io;
pub mod run;
pub mod svg;

pub use config::{parse_config, parse_config_file, ConfigDocument};
pub use error::CliError;
pub use run::{run, Mode, Overrides, RunConfig};
