//! File formats, configuration and the command-line front end for
//! [`linkspectra_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;

pub use commands::{run, Outcome};
pub use config::RunConfig;
pub use error::{CliError, Result};
