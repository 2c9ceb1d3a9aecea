//! Command-line harness around the `cwfcm` library: single runs, seeded
//! benchmark sweeps, summary tables and rank statistics.

pub mod commands;
pub mod config;
pub mod report;
pub mod sweep;
