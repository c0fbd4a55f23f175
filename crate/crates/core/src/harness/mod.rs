//! Monte Carlo experiment harness: configuration, deterministic trial
//! execution, aggregation and CSV/JSON output.

mod config;
mod experiment;
mod output;

pub use config::{EnvironmentPolicy, ExperimentConfig, Mode, Preset};
pub use experiment::{
    capacity, codebook_rng, run_experiment, trial_rng, AggregateRow, Experiment, ExperimentOutput,
    GridPoint, TrialRecord, OVERLOAD_PROBE_SYMBOLS,
};
pub use output::{
    write_aggregate_csv, write_output_dir, write_trials_csv, OutputFiles, AGGREGATE_FILE,
    CONFIG_FILE, SUMMARY_FILE, TRIALS_FILE,
};
