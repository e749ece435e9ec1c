//! Monte Carlo experiments, text formats and configuration for the
//! `cocompute` command-line tool.

pub mod config;
pub mod experiment;
pub mod format;
