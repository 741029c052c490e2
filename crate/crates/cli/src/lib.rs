//! Command-line front end of the selfish-bandit lab: manifests, per-horizon
//! parameter policies, CSV/JSON outputs and SVG plots.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fuzzing;
pub mod json;
pub mod plot;
pub mod policy;
pub mod schema;

pub use error::CliError;
