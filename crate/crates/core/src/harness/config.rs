//! Experiment configuration. The same TOML schema is used for input
//! configs and for the manifest written next to every result.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dqn::Hyperparams;
use crate::env::{DecodeModel, EnvConfig, DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_PSD_W_PER_HZ};
use crate::error::EnvError;
use crate::phy::LinkBudget;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Train,
    Eval,
    SweepLatency,
    SweepDistance,
    Baseline,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Train => "train",
            Mode::Eval => "eval",
            Mode::SweepLatency => "sweep-latency",
            Mode::SweepDistance => "sweep-distance",
            Mode::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Mode::Train, Mode::Eval, Mode::SweepLatency, Mode::SweepDistance, Mode::Baseline]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

/// Physical settings in configuration units (powers in dBm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSettings {
    pub bandwidth_hz: f64,
    pub latency_budget_ms: f64,
    pub payload_bits: u32,
    pub source_power_dbm: f64,
    pub relay_power_dbm: f64,
    pub source_distance_m: f64,
    pub relay_distance_m: f64,
    pub path_loss_exponent: f64,
    pub noise_psd_w_per_hz: f64,
    pub max_attempts: u32,
    pub payload_scale_bits: f64,
    /// Replaces the finite-blocklength model with a fixed per-attempt
    /// error probability when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forced_error_prob: Option<f64>,
}

impl Default for EnvSettings {
    fn default() -> Self {
        EnvSettings {
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            latency_budget_ms: 2.0,
            payload_bits: 256,
            source_power_dbm: 30.0,
            relay_power_dbm: 30.0,
            source_distance_m: 500.0,
            relay_distance_m: 500.0,
            path_loss_exponent: 2.0,
            noise_psd_w_per_hz: DEFAULT_NOISE_PSD_W_PER_HZ,
            max_attempts: 64,
            payload_scale_bits: 256.0,
            forced_error_prob: None,
        }
    }
}

impl EnvSettings {
    pub fn to_env_config(&self) -> Result<EnvConfig, EnvError> {
        let noise = self.noise_psd_w_per_hz * self.bandwidth_hz;
        let cfg = EnvConfig {
            bandwidth_hz: self.bandwidth_hz,
            latency_budget_ms: self.latency_budget_ms,
            payload_bits: self.payload_bits,
            source_link: LinkBudget::from_dbm(
                self.source_power_dbm,
                self.source_distance_m,
                self.path_loss_exponent,
                noise,
            )?,
            relay_link: LinkBudget::from_dbm(self.relay_power_dbm, self.relay_distance_m, self.path_loss_exponent, noise)?,
            max_attempts: self.max_attempts,
            decode_model: match self.forced_error_prob {
                Some(p) => DecodeModel::Constant(p),
                None => DecodeModel::FiniteBlocklength,
            },
            payload_scale_bits: self.payload_scale_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub latency_ms: Vec<f64>,
    pub source_distance_m: Vec<f64>,
    /// `d1 + d2` held fixed in the distance sweep.
    pub total_distance_m: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            latency_ms: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            source_distance_m: vec![200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0],
            total_distance_m: 1000.0,
        }
    }
}

/// Learning rate shipped for desk-scale (20k-episode) runs.
pub const DESK_LEARNING_RATE: f64 = 3e-4;
pub const DESK_TRAIN_EPISODES: u64 = 20_000;
/// Target sync period scaled with the episode count (2000 per 100k).
pub const DESK_TARGET_SYNC: u64 = 400;

pub fn desk_hyperparams() -> Hyperparams {
    Hyperparams {
        episodes: DESK_TRAIN_EPISODES,
        learning_rate: DESK_LEARNING_RATE,
        target_sync_period: DESK_TARGET_SYNC,
        ..Hyperparams::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub eval_episodes: u64,
    pub baseline_episodes: u64,
    /// Window of the moving average written next to reward traces.
    pub reward_smoothing: usize,
    /// Checkpoint read by `eval`; defaults to `<output_dir>/checkpoint.bin`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    pub env: EnvSettings,
    pub training: Hyperparams,
    pub sweep: SweepSettings,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            mode: Mode::Train,
            seed: 1,
            output_dir: PathBuf::from("out"),
            eval_episodes: 100_000,
            baseline_episodes: 100_000,
            reward_smoothing: 500,
            checkpoint: None,
            env: EnvSettings::default(),
            training: desk_hyperparams(),
            sweep: SweepSettings::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.env.to_env_config()?;
        self.training.validate()?;
        if self.eval_episodes == 0 || self.baseline_episodes == 0 {
            return Err(HarnessError::Config("episode counts must be positive".into()));
        }
        if self.reward_smoothing == 0 {
            return Err(HarnessError::Config("reward smoothing window must be positive".into()));
        }
        match self.mode {
            Mode::SweepLatency if self.sweep.latency_ms.is_empty() => {
                Err(HarnessError::Config("latency sweep grid is empty".into()))
            }
            Mode::SweepDistance if self.sweep.source_distance_m.is_empty() => {
                Err(HarnessError::Config("distance sweep grid is empty".into()))
            }
            Mode::SweepDistance
                if self
                    .sweep
                    .source_distance_m
                    .iter()
                    .any(|&d| !(d > 0.0 && d < self.sweep.total_distance_m)) =>
            {
                Err(HarnessError::Config("every source distance must lie strictly inside (0, total distance)".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| self.output_dir.join("checkpoint.bin"))
    }
}
