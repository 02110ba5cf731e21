//! Command-line front end: configuration, report model and subcommands.

pub mod commands;
pub mod config;
pub mod report;
