use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cascade_coop::harness::{ExperimentConfig, Mode};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        num_antennas: 16,
        num_paths: 6,
        effective_dim: 4,
        num_users: 3,
        snr_db_grid: vec![-5.0, 5.0],
        b_grid: vec![2, 4],
        gamma_db_grid: vec![10.0],
        bandwidth_ratio_grid: vec![1.0, 4.0],
        num_trials: 8,
        mode: Mode::QuantizedRsi,
        ..ExperimentConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn run_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config());
    let outputs: Vec<_> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let threads = if *name == "a" { "1" } else { "2" };
            let status = sim(&[
                "--threads",
                threads,
                "run",
                "--config",
                &config,
                "--out",
                out.to_str().unwrap(),
                "--json",
            ]);
            assert!(status.status.success(), "{status:?}");
            out
        })
        .collect();
    for file in ["trials.csv", "aggregate.csv"] {
        let a = fs::read(outputs[0].join(file)).unwrap();
        let b = fs::read(outputs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between runs");
    }
    let trials = fs::read_to_string(outputs[0].join("trials.csv")).unwrap();
    // 2 SNR x 2 b x 2 bandwidths x 8 trials plus the header.
    assert_eq!(trials.lines().count(), 65);
    assert!(outputs[0].join("summary.json").exists());
}

#[test]
fn preset_honours_trial_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snr");
    let status = sim(&[
        "preset",
        "fig-capacity-vs-snr",
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "3",
        "--seed",
        "9",
    ]);
    assert!(status.status.success(), "{status:?}");
    let cfg = ExperimentConfig::load(&out.join("config.json")).unwrap();
    assert_eq!((cfg.num_trials, cfg.master_seed), (3, 9));
    let aggregate = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    // 9 SNR points x 2 codebook sizes.
    assert_eq!(aggregate.lines().count(), 19);
    assert!(aggregate.starts_with("preset,mode,M,P,D,L,b,snr_db,gamma_db,bw_ratio,"));
}

#[test]
fn validate_accepts_good_and_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), &small_config());
    assert!(sim(&["validate", "--config", &good]).status.success());

    let bad_path = dir.path().join("bad.json");
    let mut value: serde_json::Value =
        serde_json::from_str(&small_config().to_json().unwrap()).unwrap();
    value["surprise"] = serde_json::json!(1);
    fs::write(&bad_path, value.to_string()).unwrap();
    let out = sim(&["validate", "--config", bad_path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));

    let narrow = ExperimentConfig {
        effective_dim: 2,
        ..small_config()
    };
    let narrow_path = dir.path().join("narrow");
    fs::create_dir(&narrow_path).unwrap();
    let narrow = write_config(&narrow_path, &narrow);
    assert!(!sim(&["validate", "--config", &narrow]).status.success());
    let out_dir = dir.path().join("never");
    let run = sim(&[
        "run",
        "--config",
        &narrow,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!run.status.success());
    assert!(!out_dir.exists());
}

#[test]
fn unknown_preset_and_missing_file_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert!(
        !sim(&["preset", "fig-nothing", "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    assert!(!sim(&["validate", "--config", "/nonexistent/config.json"])
        .status
        .success());
}
