//! Experiment runner: training, evaluation, sweeps and the baseline.
//!
//! Every run writes `manifest.toml` (the fully resolved configuration)
//! and, depending on the mode, `metrics.csv`, reward traces and
//! checkpoints. Training, evaluation and baseline seeds are derived from
//! the master seed and the resolved environment settings, so the same
//! physical configuration always yields the same policy and the same
//! metric rows whichever mode produced it.

mod config;
mod metrics;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{
    desk_hyperparams, EnvSettings, ExperimentSpec, Mode, SweepSettings, DESK_LEARNING_RATE, DESK_TARGET_SYNC,
    DESK_TRAIN_EPISODES,
};
pub use metrics::{
    estimate_packet_loss, metrics_csv, reward_trace_csv, MetricRow, PacketLossEstimate, Scheme, EVAL_CHUNK,
    METRICS_HEADER,
};

use crate::baseline::baseline_loss;
use crate::dqn::{load_checkpoint, save_checkpoint, DualTrainer, GreedyPolicy, Hyperparams, RewardLog};
use crate::env::{Hop, RelayEnv};
use crate::error::{DqnError, EnvError};
use crate::seed::derive_seed;

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const SOURCE_TRACE_FILE: &str = "rewards_source.csv";
pub const RELAY_TRACE_FILE: &str = "rewards_relay.csv";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Dqn(#[from] DqnError),
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// A trained policy pair together with its training log.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub label: String,
    pub settings: EnvSettings,
    pub trainer: DualTrainer,
}

impl TrainingRun {
    pub fn log(&self) -> &RewardLog {
        &self.trainer.log
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<MetricRow>,
    pub runs: Vec<TrainingRun>,
    pub files: Vec<PathBuf>,
}

fn settings_key(settings: &EnvSettings) -> String {
    toml::to_string(settings).expect("environment settings serialize")
}

pub fn training_seed(master: u64, settings: &EnvSettings) -> u64 {
    derive_seed(master, &format!("train\n{}", settings_key(settings)), 0)
}

pub fn eval_seed(master: u64, settings: &EnvSettings) -> u64 {
    derive_seed(master, &format!("eval\n{}", settings_key(settings)), 0)
}

pub fn baseline_seed(master: u64, settings: &EnvSettings) -> u64 {
    derive_seed(master, &format!("baseline\n{}", settings_key(settings)), 0)
}

pub fn train_policies(settings: &EnvSettings, hyper: &Hyperparams, master: u64) -> Result<DualTrainer, HarnessError> {
    let env = RelayEnv::new(settings.to_env_config()?)?;
    let mut trainer = DualTrainer::new(env, hyper.clone(), training_seed(master, settings))?;
    trainer.train_to_completion();
    Ok(trainer)
}

pub fn evaluate_policies(trainer: &DualTrainer, settings: &EnvSettings, episodes: u64, master: u64) -> PacketLossEstimate {
    let (source, relay) = (&trainer.source.main, &trainer.relay.main);
    estimate_packet_loss(trainer.env(), episodes, eval_seed(master, settings), || {
        (GreedyPolicy { net: source }, GreedyPolicy { net: relay })
    })
}

pub fn evaluate_baseline(settings: &EnvSettings, episodes: u64, master: u64) -> Result<crate::baseline::LossEstimate, HarnessError> {
    Ok(baseline_loss(&settings.to_env_config()?, episodes, baseline_seed(master, settings)))
}

/// Writes the checkpoint and both reward traces of a run into `dir`.
fn write_training_outputs(run: &TrainingRun, dir: &Path, window: usize, files: &mut Vec<PathBuf>) -> Result<(), HarnessError> {
    let ckpt = dir.join(CHECKPOINT_FILE);
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    save_checkpoint(&run.trainer, &ckpt)?;
    files.push(ckpt);
    for (hop, name) in [(Hop::Source, SOURCE_TRACE_FILE), (Hop::Relay, RELAY_TRACE_FILE)] {
        let path = dir.join(name);
        write_file(&path, &reward_trace_csv(run.log(), hop, window))?;
        files.push(path);
    }
    Ok(())
}

fn progress(msg: &str) {
    eprintln!("[relay-urllc] {msg}");
}

/// Runs the experiment described by `spec` and writes its outputs under
/// `spec.output_dir`.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport, HarnessError> {
    spec.validate()?;
    let mut report = RunReport::default();
    let out = &spec.output_dir;
    let manifest = out.join(MANIFEST_FILE);
    write_file(&manifest, &spec.to_toml())?;
    report.files.push(manifest);

    match spec.mode {
        Mode::Train => {
            progress(&format!("training {} episodes", spec.training.episodes));
            let trainer = train_policies(&spec.env, &spec.training, spec.seed)?;
            let run = TrainingRun { label: "train".into(), settings: spec.env.clone(), trainer };
            write_training_outputs(&run, out, spec.reward_smoothing, &mut report.files)?;
            report.runs.push(run);
        }
        Mode::Eval => {
            let path = spec.checkpoint_path();
            let env = RelayEnv::new(spec.env.to_env_config()?)?;
            let trainer = load_checkpoint(&path, env).map_err(|e| match e {
                DqnError::Io(source) => HarnessError::Io { path: path.clone(), source },
                other => other.into(),
            })?;
            progress(&format!("evaluating {} over {} episodes", path.display(), spec.eval_episodes));
            let est = evaluate_policies(&trainer, &spec.env, spec.eval_episodes, spec.seed);
            report.rows.push(MetricRow::drl("none", 0.0, &est));
        }
        Mode::Baseline => {
            progress(&format!("one-shot baseline over {} draws", spec.baseline_episodes));
            let est = evaluate_baseline(&spec.env, spec.baseline_episodes, spec.seed)?;
            report.rows.push(MetricRow::oneshot("none", 0.0, &est));
        }
        Mode::SweepLatency | Mode::SweepDistance => {
            let (variable, points) = sweep_points(spec);
            for (value, settings) in points {
                let label = format!("{variable}={value}");
                progress(&format!("{label}: training {} episodes", spec.training.episodes));
                let trainer = train_policies(&settings, &spec.training, spec.seed)?;
                let est = evaluate_policies(&trainer, &settings, spec.eval_episodes, spec.seed);
                let base = evaluate_baseline(&settings, spec.baseline_episodes, spec.seed)?;
                progress(&format!("{label}: drl {:.3e} oneshot {:.3e}", est.loss, base.loss));
                report.rows.push(MetricRow::drl(variable, value, &est));
                report.rows.push(MetricRow::oneshot(variable, value, &base));
                let run = TrainingRun { label, settings, trainer };
                write_training_outputs(&run, &out.join("runs").join(&run.label), spec.reward_smoothing, &mut report.files)?;
                report.runs.push(run);
            }
        }
    }

    if !report.rows.is_empty() {
        let path = out.join(METRICS_FILE);
        write_file(&path, &metrics_csv(&report.rows))?;
        report.files.push(path);
    }
    Ok(report)
}

/// The environment settings of every point of a sweep mode.
pub fn sweep_points(spec: &ExperimentSpec) -> (&'static str, Vec<(f64, EnvSettings)>) {
    match spec.mode {
        Mode::SweepLatency => (
            "latency_ms",
            spec.sweep
                .latency_ms
                .iter()
                .map(|&t| (t, EnvSettings { latency_budget_ms: t, ..spec.env.clone() }))
                .collect(),
        ),
        Mode::SweepDistance => (
            "source_distance_m",
            spec.sweep
                .source_distance_m
                .iter()
                .map(|&d| {
                    let s = EnvSettings {
                        source_distance_m: d,
                        relay_distance_m: spec.sweep.total_distance_m - d,
                        ..spec.env.clone()
                    };
                    (d, s)
                })
                .collect(),
        ),
        _ => ("none", Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec(dir: &Path, mode: Mode) -> ExperimentSpec {
        let mut spec = ExperimentSpec { mode, output_dir: dir.to_path_buf(), ..ExperimentSpec::default() };
        spec.training.episodes = 30;
        spec.training.batch_size = 8;
        spec.training.hidden_layers = vec![8, 8];
        spec.eval_episodes = 500;
        spec.baseline_episodes = 500;
        spec.reward_smoothing = 5;
        spec.sweep.latency_ms = vec![1.0, 2.0];
        spec
    }

    #[test]
    fn seeds_follow_the_physical_configuration() {
        let a = EnvSettings::default();
        let b = EnvSettings { latency_budget_ms: 3.0, ..a.clone() };
        assert_eq!(training_seed(1, &a), training_seed(1, &a.clone()));
        assert_ne!(training_seed(1, &a), training_seed(1, &b));
        assert_ne!(training_seed(1, &a), training_seed(2, &a));
        assert_ne!(training_seed(1, &a), eval_seed(1, &a));
    }

    #[test]
    fn distance_sweep_keeps_total_distance() {
        let spec = ExperimentSpec { mode: Mode::SweepDistance, ..ExperimentSpec::default() };
        let (var, pts) = sweep_points(&spec);
        assert_eq!(var, "source_distance_m");
        assert_eq!(pts.len(), 7);
        for (d, s) in pts {
            assert_eq!(s.source_distance_m, d);
            assert_eq!(s.source_distance_m + s.relay_distance_m, 1000.0);
        }
    }

    #[test]
    fn train_then_eval_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let train = run(&tiny_spec(dir.path(), Mode::Train)).unwrap();
        assert_eq!(train.runs[0].log().len(), 30);
        for f in [MANIFEST_FILE, CHECKPOINT_FILE, SOURCE_TRACE_FILE, RELAY_TRACE_FILE] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let eval = run(&tiny_spec(dir.path(), Mode::Eval)).unwrap();
        assert_eq!(eval.rows.len(), 1);
        assert_eq!(eval.rows[0].scheme, Scheme::Drl);
        let text = std::fs::read_to_string(dir.path().join(METRICS_FILE)).unwrap();
        assert!(text.starts_with(METRICS_HEADER));
    }

    #[test]
    fn manifest_reproduces_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec(dir.path(), Mode::SweepLatency);
        let first = run(&spec).unwrap();
        assert_eq!(first.rows.len(), 4);
        let metrics = std::fs::read(dir.path().join(METRICS_FILE)).unwrap();
        let manifest = ExperimentSpec::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest, spec);
        run(&manifest).unwrap();
        assert_eq!(std::fs::read(dir.path().join(METRICS_FILE)).unwrap(), metrics);
    }

    #[test]
    fn missing_checkpoint_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(run(&tiny_spec(dir.path(), Mode::Eval)).is_err());
    }
}
