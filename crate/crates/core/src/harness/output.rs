//! CSV and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{AggregateRow, ExperimentOutput, TrialRecord};
use crate::error::Result;

pub const TRIALS_FILE: &str = "trials.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_rows<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// One row per trial and grid point. Missing values are empty cells.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    write_rows(records, out)
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    write_rows(rows, out)
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    aggregates: &'a [AggregateRow],
    records: &'a [TrialRecord],
}

/// Paths of the files written by [`write_output_dir`].
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub trials: PathBuf,
    pub aggregate: PathBuf,
    pub config: PathBuf,
    pub summary: Option<PathBuf>,
}

/// Writes `trials.csv`, `aggregate.csv` and the resolved `config.json` into
/// `dir` (created if missing), plus `summary.json` when `json` is set.
pub fn write_output_dir(
    output: &ExperimentOutput,
    config: &ExperimentConfig,
    dir: &Path,
    json: bool,
) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let files = OutputFiles {
        trials: dir.join(TRIALS_FILE),
        aggregate: dir.join(AGGREGATE_FILE),
        config: dir.join(CONFIG_FILE),
        summary: json.then(|| dir.join(SUMMARY_FILE)),
    };
    write_trials_csv(&output.records, fs::File::create(&files.trials)?)?;
    write_aggregate_csv(&output.aggregates, fs::File::create(&files.aggregate)?)?;
    fs::write(&files.config, config.to_json()?)?;
    if let Some(path) = &files.summary {
        let summary = Summary {
            config,
            aggregates: &output.aggregates,
            records: &output.records,
        };
        fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(files)
}
