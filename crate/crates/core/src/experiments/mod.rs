//! Config-driven sweeps, CSV and plot output, optimal cluster size reports and
//! the acceptance self test.

pub mod config;
pub mod optimal;
pub mod plot;
pub mod presets;
pub mod runner;
pub mod selftest;

pub use config::{ExperimentConfig, Mode, PolicyChoice, RateCase, SimConfig, SimEstimator};
pub use optimal::{report_optimal_k, OptimalKReport};
pub use plot::{emit_plot_data, XAxis};
pub use runner::{read_csv, run_experiment, to_csv_bytes, write_csv, ResultRow, CSV_HEADER};
