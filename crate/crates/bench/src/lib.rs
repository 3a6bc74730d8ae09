//! Experiment harness around `ttp-core`: repeated runs with on-disk records,
//! Welch-test comparisons against a baseline selection scheme, and plot data.

pub mod config;
pub mod experiment;
pub mod plot;
pub mod stats;
pub mod summary;
