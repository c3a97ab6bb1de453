//! Configuration parsing and scenario execution behind the `flapsim` binary.

pub mod config;
pub mod run;
pub mod scenarios;
pub mod units;
