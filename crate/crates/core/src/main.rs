use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use relay_urllc::harness::{self, ExperimentSpec, Mode};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Train,
    Eval,
    SweepLatency,
    SweepDistance,
    Baseline,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Train => Mode::Train,
            ModeArg::Eval => Mode::Eval,
            ModeArg::SweepLatency => Mode::SweepLatency,
            ModeArg::SweepDistance => Mode::SweepDistance,
            ModeArg::Baseline => Mode::Baseline,
        }
    }
}

/// DQN-based resource allocation for latency-constrained two-hop relaying.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Experiment to run; overrides `mode` in the config file.
    mode: Option<ModeArg>,
    /// TOML experiment config (a previous run's manifest.toml works too).
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(short, long, env = "RELAY_URLLC_OUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_episodes: Option<u64>,
    #[arg(long)]
    eval_episodes: Option<u64>,
    #[arg(long)]
    baseline_episodes: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Latency budget T_th in ms.
    #[arg(long)]
    latency_ms: Option<f64>,
    /// Checkpoint read by `eval`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn resolve(cli: &Cli) -> anyhow::Result<ExperimentSpec> {
    let mut spec = match &cli.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    if let Some(m) = cli.mode {
        spec.mode = m.into();
    }
    if let Some(d) = &cli.output_dir {
        spec.output_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(n) = cli.train_episodes {
        spec.training.episodes = n;
    }
    if let Some(n) = cli.eval_episodes {
        spec.eval_episodes = n;
    }
    if let Some(n) = cli.baseline_episodes {
        spec.baseline_episodes = n;
    }
    if let Some(lr) = cli.learning_rate {
        spec.training.learning_rate = lr;
    }
    if let Some(t) = cli.latency_ms {
        spec.env.latency_budget_ms = t;
    }
    if let Some(c) = &cli.checkpoint {
        spec.checkpoint = Some(c.clone());
    }
    if cli.mode.is_none() && cli.config.is_none() && !cli.print_config {
        anyhow::bail!("no mode given; pass one of train, eval, sweep-latency, sweep-distance, baseline");
    }
    spec.validate()?;
    Ok(spec)
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let spec = resolve(&cli)?;
    if cli.print_config {
        print!("{}", spec.to_toml());
        return Ok(());
    }
    let report = harness::run(&spec).with_context(|| format!("{} run failed", spec.mode))?;
    for row in &report.rows {
        println!("{}", row.to_csv_line());
    }
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
