//! Trial execution and aggregation.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{EnvironmentPolicy, ExperimentConfig, Mode};
use crate::bounds::{eigen_spectrum, expected_cell_distortion, lower_bound_terms};
use crate::channel::{analytic_covariance, draw_environment, inner_precoder, sample_channel};
use crate::codebook::{generate_codebook, CodewordScores, DecodingCodebook};
use crate::error::{Error, Result};
use crate::linksim::measure_overload;
use crate::precoding::{baseline_from_inverse, effective_channel, GramInverse};
use crate::quantization::{bits_from_bandwidth, quantized_snr_from_inverse, CooperationLink};

/// Symbol vectors sent per trial to measure the quantizer overload rate.
pub const OVERLOAD_PROBE_SYMBOLS: usize = 256;

// RNG stream layout under one ChaCha key. Channel draws use stream
// `trial`, so they do not depend on the mode or on which grids are swept.
const PROBE_STREAM_BASE: u64 = 1 << 62;
const FIXED_ENV_STREAM: u64 = 1 << 61;
const CODEBOOK_STREAM_BASE: u64 = 1 << 63;

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for the channel of one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha20Rng {
    stream_rng(master_seed, trial)
}

/// Generator for the codebook of a given user count.
pub fn codebook_rng(codebook_seed: u64, users: usize) -> ChaCha20Rng {
    stream_rng(codebook_seed, CODEBOOK_STREAM_BASE + users as u64)
}

/// Sum rate `sum_p log2(1 + SNR_p)` in bits/s/Hz.
pub fn capacity(snrs: &[f64]) -> f64 {
    snrs.iter().map(|s| s.ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// One swept parameter combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub users: usize,
    pub bits: u32,
    pub snr_db: f64,
    pub gamma_db: Option<f64>,
    pub bandwidth_ratio: Option<f64>,
}

impl GridPoint {
    pub fn noise_power(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }
}

/// Capacities of one trial at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub preset: &'static str,
    pub mode: &'static str,
    #[serde(rename = "M")]
    pub num_antennas: usize,
    #[serde(rename = "P")]
    pub users: usize,
    #[serde(rename = "D")]
    pub effective_dim: usize,
    #[serde(rename = "L")]
    pub num_paths: usize,
    pub b: u32,
    pub snr_db: f64,
    pub gamma_db: Option<f64>,
    pub bw_ratio: Option<f64>,
    pub trial: u64,
    pub capacity_coop: Option<f64>,
    pub capacity_zf: Option<f64>,
    pub capacity_ideal: Option<f64>,
    pub capacity_bound: Option<f64>,
    pub cond_fail: u32,
    pub overload_rate: Option<f64>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.cond_fail > 0
    }
}

/// Statistics over all trials of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub preset: &'static str,
    pub mode: &'static str,
    #[serde(rename = "M")]
    pub num_antennas: usize,
    #[serde(rename = "P")]
    pub users: usize,
    #[serde(rename = "D")]
    pub effective_dim: usize,
    #[serde(rename = "L")]
    pub num_paths: usize,
    pub b: u32,
    pub snr_db: f64,
    pub gamma_db: Option<f64>,
    pub bw_ratio: Option<f64>,
    /// Trials that produced capacities.
    pub trials: u64,
    pub cond_fail: u64,
    pub mean_bound: Option<f64>,
    pub mean_overload_rate: Option<f64>,
    pub mean_coop: Option<f64>,
    pub sem_coop: Option<f64>,
    pub mean_zf: Option<f64>,
    pub sem_zf: Option<f64>,
    pub mean_ideal: Option<f64>,
    pub norm_capacity: Option<f64>,
}

/// Mean and standard error of the mean.
fn mean_sem(values: &[f64]) -> Option<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sem = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Some((mean, sem))
}

/// A validated configuration with its codebooks generated, ready to run
/// trials.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    points: Vec<GridPoint>,
    /// One codebook per user count, sized for the largest `b`; smaller
    /// codebooks are its prefixes.
    codebooks: BTreeMap<usize, DecodingCodebook>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let max_bits = *config.b_grid.iter().max().expect("validated");
        let mut codebooks = BTreeMap::new();
        for users in config.user_counts() {
            if let std::collections::btree_map::Entry::Vacant(slot) = codebooks.entry(users) {
                let mut rng = codebook_rng(config.codebook_seed(), users);
                slot.insert(generate_codebook(users, max_bits, &mut rng)?);
            }
        }
        let points = Self::enumerate_points(&config);
        Ok(Self {
            config,
            points,
            codebooks,
        })
    }

    fn enumerate_points(config: &ExperimentConfig) -> Vec<GridPoint> {
        let links: Vec<(Option<f64>, Option<f64>)> = match config.mode {
            Mode::IdealRsi => vec![(None, None)],
            Mode::QuantizedRsi => config
                .gamma_db_grid
                .iter()
                .flat_map(|g| {
                    config
                        .bandwidth_ratio_grid
                        .iter()
                        .map(move |r| (Some(*g), Some(*r)))
                })
                .collect(),
        };
        let mut points = Vec::new();
        for users in config.user_counts() {
            for &bits in &config.b_grid {
                for &snr_db in &config.snr_db_grid {
                    for &(gamma_db, bandwidth_ratio) in &links {
                        points.push(GridPoint {
                            users,
                            bits,
                            snr_db,
                            gamma_db,
                            bandwidth_ratio,
                        });
                    }
                }
            }
        }
        points
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Grid points in output order.
    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn codebook(&self, users: usize) -> Option<&DecodingCodebook> {
        self.codebooks.get(&users)
    }

    fn record(&self, point: &GridPoint, trial: u64) -> TrialRecord {
        let cfg = &self.config;
        TrialRecord {
            preset: cfg.preset_name(),
            mode: cfg.mode.as_str(),
            num_antennas: cfg.num_antennas,
            users: point.users,
            effective_dim: cfg.effective_dim,
            num_paths: cfg.num_paths,
            b: point.bits,
            snr_db: point.snr_db,
            gamma_db: point.gamma_db,
            bw_ratio: point.bandwidth_ratio,
            trial,
            capacity_coop: None,
            capacity_zf: None,
            capacity_ideal: None,
            capacity_bound: None,
            cond_fail: 0,
            overload_rate: None,
        }
    }

    /// Runs one channel realization through every grid point. The result is
    /// a pure function of the configuration and `trial`.
    pub fn run_trial(&self, trial: u64) -> Result<Vec<TrialRecord>> {
        let cfg = &self.config;
        let mut rng = trial_rng(cfg.master_seed, trial);
        let env = match cfg.environment {
            EnvironmentPolicy::PerTrial => draw_environment(
                cfg.num_antennas,
                cfg.num_paths,
                cfg.sector_center,
                cfg.sector_spread,
                &mut rng,
            )?,
            EnvironmentPolicy::Fixed => draw_environment(
                cfg.num_antennas,
                cfg.num_paths,
                cfg.sector_center,
                cfg.sector_spread,
                &mut stream_rng(cfg.master_seed, FIXED_ENV_STREAM),
            )?,
        };
        let max_users = *cfg.user_counts().iter().max().expect("validated");
        // Every user count uses the leading columns of one draw, so sweeps
        // over P compare the same users.
        let channel = sample_channel(&env, max_users, &mut rng)?;
        let precoder = inner_precoder(&analytic_covariance(&env), cfg.effective_dim)?;
        let mut probe_rng = stream_rng(cfg.master_seed, PROBE_STREAM_BASE + trial);

        let mut records = Vec::with_capacity(self.points.len());
        let mut i = 0;
        while i < self.points.len() {
            // Points sharing a user count are contiguous.
            let users = self.points[i].users;
            let end = i + self.points[i..]
                .iter()
                .take_while(|p| p.users == users)
                .count();
            let block = &self.points[i..end];
            i = end;

            let h_e = effective_channel(&precoder, &channel.first_users(users)?)?;
            let gram_inv = match GramInverse::new(&h_e) {
                Ok(g) => g,
                Err(Error::IllConditioned { .. }) => {
                    records.extend(block.iter().map(|p| TrialRecord {
                        cond_fail: 1,
                        ..self.record(p, trial)
                    }));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let spectrum = eigen_spectrum(&h_e)?;
            let codebook = &self.codebooks[&users];
            let scores = CodewordScores::new(codebook, &gram_inv)?;

            let mut overload_cache: Option<(u32, u64, f64)> = None;
            for point in block {
                let n0 = point.noise_power();
                let (index, _) = scores.best_in_prefix(1usize << point.bits);
                let q = &codebook.codewords()[index];

                let zf = capacity(&baseline_from_inverse(&gram_inv, n0));
                let ideal_snrs: Vec<f64> = spectrum.eigenvalues().iter().map(|l| l / n0).collect();
                let ideal = capacity(&ideal_snrs);
                let bound = expected_cell_distortion(point.bits, users)
                    .and_then(|d| lower_bound_terms(&spectrum, d))
                    .ok()
                    .map(|terms| capacity(&terms.iter().map(|t| t / n0).collect::<Vec<_>>()));

                let (coop, overload) = match (cfg.mode, point.gamma_db, point.bandwidth_ratio) {
                    (Mode::QuantizedRsi, Some(gamma_db), Some(ratio)) => {
                        let link = CooperationLink::from_db(ratio, gamma_db)?;
                        let bits = bits_from_bandwidth(&link);
                        let out = quantized_snr_from_inverse(&gram_inv, q, n0, bits, cfg.tau)?;
                        // Overload depends on the codeword and noise only.
                        let key = (point.bits, point.snr_db.to_bits());
                        let rate = match overload_cache {
                            Some((b, s, r)) if (b, s) == key => r,
                            _ => {
                                let r = measure_overload(
                                    &h_e,
                                    q,
                                    n0,
                                    cfg.tau,
                                    OVERLOAD_PROBE_SYMBOLS,
                                    &mut probe_rng,
                                )?;
                                overload_cache = Some((key.0, key.1, r));
                                r
                            }
                        };
                        (capacity(&out.snrs), Some(rate))
                    }
                    _ => {
                        let snrs: Vec<f64> = (0..users)
                            .map(|p| gram_inv.per_user_snr(q, n0, p))
                            .collect();
                        (capacity(&snrs), None)
                    }
                };

                records.push(TrialRecord {
                    capacity_coop: Some(coop),
                    capacity_zf: Some(zf),
                    capacity_ideal: Some(ideal),
                    capacity_bound: bound,
                    overload_rate: overload,
                    ..self.record(point, trial)
                });
            }
        }
        Ok(records)
    }

    /// Runs every trial on a pool of `threads` workers (all available cores
    /// when `None`). Output order does not depend on scheduling.
    pub fn run(&self, threads: Option<usize>) -> Result<ExperimentOutput> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let per_trial: Vec<Vec<TrialRecord>> = pool.install(|| {
            (0..self.config.num_trials)
                .into_par_iter()
                .map(|t| self.run_trial(t))
                .collect::<Result<Vec<_>>>()
        })?;

        let n_points = self.points.len();
        let mut records = Vec::with_capacity(n_points * per_trial.len());
        for k in 0..n_points {
            records.extend(per_trial.iter().map(|trial| trial[k].clone()));
        }
        let aggregates = records
            .chunks(per_trial.len())
            .map(|chunk| self.aggregate(chunk))
            .collect();
        Ok(ExperimentOutput {
            records,
            aggregates,
        })
    }

    fn aggregate(&self, chunk: &[TrialRecord]) -> AggregateRow {
        let first = &chunk[0];
        let ok: Vec<&TrialRecord> = chunk.iter().filter(|r| !r.failed()).collect();
        let collect = |f: fn(&TrialRecord) -> Option<f64>| -> Vec<f64> {
            ok.iter().filter_map(|r| f(r)).collect()
        };
        let coop = mean_sem(&collect(|r| r.capacity_coop));
        let zf = mean_sem(&collect(|r| r.capacity_zf));
        let ideal = mean_sem(&collect(|r| r.capacity_ideal));
        let bound = mean_sem(&collect(|r| r.capacity_bound));
        let overload = mean_sem(&collect(|r| r.overload_rate));
        AggregateRow {
            preset: first.preset,
            mode: first.mode,
            num_antennas: first.num_antennas,
            users: first.users,
            effective_dim: first.effective_dim,
            num_paths: first.num_paths,
            b: first.b,
            snr_db: first.snr_db,
            gamma_db: first.gamma_db,
            bw_ratio: first.bw_ratio,
            trials: ok.len() as u64,
            cond_fail: (chunk.len() - ok.len()) as u64,
            mean_bound: bound.map(|b| b.0),
            mean_overload_rate: overload.map(|o| o.0),
            mean_coop: coop.map(|c| c.0),
            sem_coop: coop.map(|c| c.1),
            mean_zf: zf.map(|z| z.0),
            sem_zf: zf.map(|z| z.1),
            mean_ideal: ideal.map(|i| i.0),
            norm_capacity: coop.zip(ideal).map(|(c, i)| c.0 / i.0),
        }
    }
}

/// Every trial record, ordered by grid point then trial, plus one aggregate
/// row per grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentOutput {
    pub fn total_failures(&self) -> u64 {
        self.aggregates.iter().map(|a| a.cond_fail).sum()
    }

    /// Grid points where every trial failed.
    pub fn empty_points(&self) -> impl Iterator<Item = &AggregateRow> {
        self.aggregates.iter().filter(|a| a.trials == 0)
    }
}

/// Validates `config`, generates its codebooks and runs every trial.
pub fn run_experiment(
    config: ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentOutput> {
    Experiment::new(config)?.run(threads)
}
