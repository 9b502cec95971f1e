//! Experiment runner for the `schoolmatch` mechanisms: seeded Monte Carlo
//! ensembles, strategy and sensitivity studies, file formats and the CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod instance;
pub mod output;
pub mod runner;
pub mod seeds;
