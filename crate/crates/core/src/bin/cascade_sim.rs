use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cascade_coop::harness::{write_output_dir, Experiment, ExperimentConfig, Preset};
use cascade_coop::Result;

/// Monte Carlo capacity experiments for codebook-based D2D cooperation.
#[derive(Parser)]
#[command(name = "cascade-sim", version)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write summary.json.
        #[arg(long)]
        json: bool,
    },
    /// Run one of the built-in figure presets.
    Preset {
        /// fig-capacity-vs-snr, fig-capacity-vs-bits,
        /// fig-capacity-vs-bandwidth-snr or fig-capacity-vs-bandwidth-gamma.
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(
    config: ExperimentConfig,
    out: &Path,
    json: bool,
    threads: Option<usize>,
) -> Result<bool> {
    let experiment = Experiment::new(config)?;
    let output = experiment.run(threads)?;
    let files = write_output_dir(&output, experiment.config(), out, json)?;
    eprintln!(
        "{} trial rows, {} grid points -> {}",
        output.records.len(),
        output.aggregates.len(),
        files.aggregate.display()
    );
    let failures = output.total_failures();
    if failures > 0 {
        eprintln!("{failures} trial evaluations hit an ill-conditioned channel and were excluded");
    }
    let empty = output.empty_points().count();
    if empty > 0 {
        eprintln!("error: {empty} grid points have no usable trials");
    }
    Ok(empty == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, json } => {
            ExperimentConfig::load(&config).and_then(|cfg| execute(cfg, &out, json, cli.threads))
        }
        Command::Preset {
            name,
            out,
            trials,
            seed,
            json,
        } => name.parse::<Preset>().and_then(|preset| {
            let mut cfg = preset.config();
            if let Some(t) = trials {
                cfg.num_trials = t;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            execute(cfg, &out, json, cli.threads)
        }),
        Command::Validate { config } => ExperimentConfig::load(&config).map(|cfg| {
            let points = Experiment::new(cfg).map(|e| e.points().len());
            match points {
                Ok(n) => {
                    println!("ok: {n} grid points");
                    true
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    false
                }
            }
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
