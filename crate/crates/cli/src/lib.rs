//! Command-line driver: configuration, scenario runs and file export.

pub mod app;
pub mod config;
pub mod output;
pub mod run;
