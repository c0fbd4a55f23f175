//! Builds an experiment configuration in code, runs it on a fixed
//! scattering environment and writes the CSV/JSON output directory.
//!
//! `cargo run --release --example custom_experiment -- <out-dir>`

use std::path::PathBuf;

use cascade_coop::harness::{write_output_dir, EnvironmentPolicy};
use cascade_coop::prelude::*;

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cascade-coop-custom"));
    let config = ExperimentConfig {
        num_antennas: 32,
        num_paths: 10,
        effective_dim: 5,
        num_users: 3,
        sector_center: 0.2,
        sector_spread: 1.0,
        snr_db_grid: vec![-5.0, 0.0, 5.0],
        b_grid: vec![4, 8],
        user_count_grid: Some(vec![2, 3]),
        gamma_db_grid: vec![15.0],
        bandwidth_ratio_grid: vec![1.0, 2.0, 4.0],
        num_trials: 100,
        master_seed: 11,
        mode: Mode::QuantizedRsi,
        environment: EnvironmentPolicy::Fixed,
        ..ExperimentConfig::default()
    };
    let experiment = Experiment::new(config)?;
    println!(
        "{} grid points x {} trials",
        experiment.points().len(),
        experiment.config().num_trials
    );
    let output = experiment.run(None)?;
    let files = write_output_dir(&output, experiment.config(), &out, true)?;
    println!(
        "wrote {} and {}",
        files.trials.display(),
        files.aggregate.display()
    );
    for row in output.aggregates.iter().filter(|r| r.snr_db == 5.0) {
        println!(
            "P={} b={} W_c/W={:?}: coop {:.3}, ZF {:.3}, ideal {:.3}, overload {:.1e}",
            row.users,
            row.b,
            row.bw_ratio.unwrap_or(0.0),
            row.mean_coop.unwrap_or(f64::NAN),
            row.mean_zf.unwrap_or(f64::NAN),
            row.mean_ideal.unwrap_or(f64::NAN),
            row.mean_overload_rate.unwrap_or(0.0)
        );
    }
    Ok(())
}
