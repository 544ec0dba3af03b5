//! Experiment configuration, orchestration, and CSV trace output.

mod config;
mod experiment;
mod plotdata;
mod trace;

pub use config::{
    default_compare_schedule, mnist_paths, parse_config_file, parse_kv_text, resolve_config,
    ConfigError, ExperimentConfig, ExperimentKind, OptimizerChoice, KEY_HELP,
};
pub use experiment::{
    classify_seed_detailed, run_experiment, ExperimentOutcome, HarnessError, SeedArtifacts,
};
pub use plotdata::{emit_plot_data, read_trace_columns, PlotDataError};
pub use trace::{CsvTraceSink, TraceRecord, THETA_COLUMN_LIMIT};
