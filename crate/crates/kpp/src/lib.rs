//! Command-line driver for the `fkpp` library: subcommands, config files,
//! CSV output and the acceptance criteria.

pub mod commands;
pub mod criteria;
pub mod error;
pub mod output;
pub mod params;
