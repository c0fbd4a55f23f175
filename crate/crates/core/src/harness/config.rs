//! Experiment configuration and the built-in figure presets.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codebook::DEFAULT_MEMORY_BUDGET;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// How shared received samples are modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Samples are shared without error.
    IdealRsi,
    /// Samples are quantized to the bit budget of the cooperation link.
    QuantizedRsi,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::IdealRsi => "ideal-rsi",
            Mode::QuantizedRsi => "quantized-rsi",
        }
    }
}

/// Whether the scattering environment is redrawn for every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvironmentPolicy {
    #[default]
    PerTrial,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FigCapacityVsSnr,
    FigCapacityVsBits,
    FigCapacityVsBandwidthSnr,
    FigCapacityVsBandwidthGamma,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::FigCapacityVsSnr,
        Preset::FigCapacityVsBits,
        Preset::FigCapacityVsBandwidthSnr,
        Preset::FigCapacityVsBandwidthGamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FigCapacityVsSnr => "fig-capacity-vs-snr",
            Preset::FigCapacityVsBits => "fig-capacity-vs-bits",
            Preset::FigCapacityVsBandwidthSnr => "fig-capacity-vs-bandwidth-snr",
            Preset::FigCapacityVsBandwidthGamma => "fig-capacity-vs-bandwidth-gamma",
        }
    }

    /// Preset configuration with 200 trials and seed 1.
    pub fn config(self) -> ExperimentConfig {
        // Shared by both bandwidth sweeps. Every point keeps at least two
        // bits per sample at the lowest link SNR used (10 dB).
        let bandwidths = vec![0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0];
        let base = ExperimentConfig {
            figure_preset: Some(self),
            ..ExperimentConfig::default()
        };
        match self {
            Preset::FigCapacityVsSnr => ExperimentConfig {
                snr_db_grid: (0..=8).map(|k| -10.0 + 2.5 * k as f64).collect(),
                b_grid: vec![6, 12],
                ..base
            },
            Preset::FigCapacityVsBits => ExperimentConfig {
                snr_db_grid: vec![-5.0],
                b_grid: (1..=16).collect(),
                user_count_grid: Some(vec![3, 4, 5]),
                ..base
            },
            Preset::FigCapacityVsBandwidthSnr => ExperimentConfig {
                mode: Mode::QuantizedRsi,
                snr_db_grid: vec![-5.0, 0.0, 5.0, 10.0],
                b_grid: vec![12],
                gamma_db_grid: vec![10.0],
                bandwidth_ratio_grid: bandwidths,
                ..base
            },
            Preset::FigCapacityVsBandwidthGamma => ExperimentConfig {
                mode: Mode::QuantizedRsi,
                snr_db_grid: vec![-5.0],
                b_grid: vec![12],
                gamma_db_grid: vec![10.0, 15.0, 20.0, 25.0, 30.0],
                bandwidth_ratio_grid: bandwidths,
                ..base
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!(
                    "unknown preset {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Declarative description of a Monte Carlo sweep.
///
/// The sweep is the Cartesian product of the user-count, codebook-bit and
/// SNR grids, and in quantized mode also the link-SNR and bandwidth grids,
/// repeated for `num_trials` channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub num_antennas: usize,
    /// User count when `user_count_grid` is absent.
    #[serde(rename = "P")]
    pub num_users: usize,
    #[serde(rename = "D")]
    pub effective_dim: usize,
    #[serde(rename = "L")]
    pub num_paths: usize,
    pub sector_center: f64,
    pub sector_spread: f64,
    /// Downlink SNR `-10 log10(N0)` in dB.
    pub snr_db_grid: Vec<f64>,
    pub b_grid: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_count_grid: Option<Vec<usize>>,
    pub tau: f64,
    /// Cooperation link SNR in dB; used in quantized mode only.
    #[serde(default)]
    pub gamma_db_grid: Vec<f64>,
    /// `W_c / W`; used in quantized mode only.
    #[serde(default)]
    pub bandwidth_ratio_grid: Vec<f64>,
    pub num_trials: u64,
    pub master_seed: u64,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure_preset: Option<Preset>,
    #[serde(default)]
    pub environment: EnvironmentPolicy,
    /// Seed for the decoding codebooks; defaults to `master_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codebook_seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_antennas: 64,
            num_users: 4,
            effective_dim: 6,
            num_paths: 20,
            sector_center: 0.0,
            sector_spread: PI,
            snr_db_grid: vec![-5.0],
            b_grid: vec![6],
            user_count_grid: None,
            tau: 30.0,
            gamma_db_grid: Vec::new(),
            bandwidth_ratio_grid: Vec::new(),
            num_trials: 200,
            master_seed: 1,
            mode: Mode::IdealRsi,
            figure_preset: None,
            environment: EnvironmentPolicy::PerTrial,
            codebook_seed: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// User counts swept, in configuration order.
    pub fn user_counts(&self) -> Vec<usize> {
        self.user_count_grid
            .clone()
            .unwrap_or_else(|| vec![self.num_users])
    }

    pub fn preset_name(&self) -> &'static str {
        self.figure_preset.map_or("custom", Preset::name)
    }

    pub fn codebook_seed(&self) -> u64 {
        self.codebook_seed.unwrap_or(self.master_seed)
    }

    /// Checks every invariant; nothing is simulated until this passes.
    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 || self.num_paths == 0 {
            return Err(config_err("M and L must be positive"));
        }
        if self.effective_dim == 0 || self.effective_dim > self.num_antennas {
            return Err(config_err(format!(
                "D = {} must be in 1..=M = {}",
                self.effective_dim, self.num_antennas
            )));
        }
        let users = self.user_counts();
        if users.is_empty() {
            return Err(config_err("user_count_grid is empty"));
        }
        if users.contains(&0) {
            return Err(config_err("user counts must be positive"));
        }
        let max_users = *users.iter().max().expect("nonempty");
        if max_users > self.effective_dim {
            return Err(config_err(format!(
                "zero-forcing needs D >= P, but D = {} and P = {max_users}",
                self.effective_dim
            )));
        }
        if !(self.sector_spread.is_finite() && self.sector_spread > 0.0) {
            return Err(config_err("sector_spread must be positive"));
        }
        if !(self.sector_center.is_finite() && (-PI / 2.0..PI / 2.0).contains(&self.sector_center))
        {
            return Err(config_err("sector_center must lie in [-pi/2, pi/2)"));
        }
        if self.snr_db_grid.is_empty() || self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return Err(config_err("snr_db_grid must be nonempty and finite"));
        }
        if self.b_grid.is_empty() {
            return Err(config_err("b_grid is empty"));
        }
        let max_bits = *self.b_grid.iter().max().expect("nonempty");
        let bytes = 1u128
            .checked_shl(max_bits)
            .map(|n| n * (max_users * max_users * std::mem::size_of::<C64>()) as u128);
        if bytes.is_none_or(|b| b > DEFAULT_MEMORY_BUDGET as u128) {
            return Err(config_err(format!(
                "a {max_bits}-bit codebook for {max_users} users exceeds the memory budget"
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(config_err("tau must be positive"));
        }
        if self.num_trials == 0 {
            return Err(config_err("num_trials must be at least 1"));
        }
        if self.mode == Mode::QuantizedRsi {
            if self.gamma_db_grid.is_empty() || self.gamma_db_grid.iter().any(|g| !g.is_finite()) {
                return Err(config_err(
                    "quantized-rsi mode needs a nonempty, finite gamma_db_grid",
                ));
            }
            if self.bandwidth_ratio_grid.is_empty()
                || self
                    .bandwidth_ratio_grid
                    .iter()
                    .any(|r| !(r.is_finite() && *r > 0.0))
            {
                return Err(config_err(
                    "quantized-rsi mode needs a nonempty grid of positive bandwidth ratios",
                ));
            }
        }
        Ok(())
    }
}
