//! Command-line driver: configuration, verification suites and commands.

pub mod commands;
pub mod config;
pub mod suites;
