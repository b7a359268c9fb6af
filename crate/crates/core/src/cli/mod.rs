//! Command-line front end: configuration, export and subcommands.

mod commands;
pub mod config;
pub mod export;

pub use commands::run;
