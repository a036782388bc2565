//! Packet-loss estimation and the CSV files written by the harness.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::baseline::LossEstimate;
use crate::dqn::{moving_average, RewardLog};
use crate::env::{Hop, HopPolicy, RelayEnv};
use crate::seed::stream_rng;

/// Episodes per evaluation RNG stream.
pub const EVAL_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketLossEstimate {
    pub loss: f64,
    pub std_error: f64,
    pub episodes: u64,
    pub lost: u64,
    /// Mean attempts on hop 1 per episode.
    pub mean_attempts_source: f64,
    /// Mean attempts on hop 2 over episodes that reached hop 2.
    pub mean_attempts_relay: f64,
    /// Mean total airtime (TTI plus ARQ, both hops) per episode.
    pub mean_airtime_ms: f64,
}

#[derive(Default)]
struct Tally {
    lost: u64,
    source_attempts: u64,
    relay_attempts: u64,
    relay_episodes: u64,
    airtime_ms: f64,
}

/// Monte Carlo packet loss of a policy pair. Episodes are split into
/// chunks of [`EVAL_CHUNK`], chunk `k` uses `stream_rng(seed, "eval", k)`
/// and the chunk tallies are merged in order, so the result does not
/// depend on the thread count.
pub fn estimate_packet_loss<F, P1, P2>(env: &RelayEnv, episodes: u64, seed: u64, policies: F) -> PacketLossEstimate
where
    F: Fn() -> (P1, P2) + Sync,
    P1: HopPolicy,
    P2: HopPolicy,
{
    assert!(episodes >= 1, "need at least one episode");
    let chunks = episodes.div_ceil(EVAL_CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, "eval", k);
            let (mut source, mut relay) = policies();
            let mut t = Tally::default();
            for _ in 0..EVAL_CHUNK.min(episodes - k * EVAL_CHUNK) {
                let rec = env.run_episode(&mut source, &mut relay, &mut rng);
                t.lost += u64::from(!rec.delivered());
                t.source_attempts += rec.attempts_on(Hop::Source) as u64;
                if rec.relay_status.is_some() {
                    t.relay_episodes += 1;
                    t.relay_attempts += rec.attempts_on(Hop::Relay) as u64;
                }
                t.airtime_ms += rec.total_time_ms;
            }
            t
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total.lost += t.lost;
        total.source_attempts += t.source_attempts;
        total.relay_attempts += t.relay_attempts;
        total.relay_episodes += t.relay_episodes;
        total.airtime_ms += t.airtime_ms;
    }
    let n = episodes as f64;
    let loss = total.lost as f64 / n;
    PacketLossEstimate {
        loss,
        std_error: (loss * (1.0 - loss) / n).sqrt(),
        episodes,
        lost: total.lost,
        mean_attempts_source: total.source_attempts as f64 / n,
        mean_attempts_relay: if total.relay_episodes == 0 {
            0.0
        } else {
            total.relay_attempts as f64 / total.relay_episodes as f64
        },
        mean_airtime_ms: total.airtime_ms / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Drl,
    OneShot,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Drl => "drl",
            Scheme::OneShot => "oneshot",
        }
    }
}

/// One line of `metrics.csv`. Attempt and airtime columns are empty for
/// the one-shot scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub sweep_variable: String,
    pub value: f64,
    pub scheme: Scheme,
    pub loss: f64,
    pub std_error: f64,
    pub episodes: u64,
    pub mean_attempts_source: Option<f64>,
    pub mean_attempts_relay: Option<f64>,
    pub mean_airtime_ms: Option<f64>,
}

pub const METRICS_HEADER: &str =
    "sweep_variable,value,scheme,loss,std_error,episodes,mean_attempts_source,mean_attempts_relay,mean_airtime_ms";

impl MetricRow {
    pub fn drl(variable: &str, value: f64, est: &PacketLossEstimate) -> Self {
        MetricRow {
            sweep_variable: variable.to_string(),
            value,
            scheme: Scheme::Drl,
            loss: est.loss,
            std_error: est.std_error,
            episodes: est.episodes,
            mean_attempts_source: Some(est.mean_attempts_source),
            mean_attempts_relay: Some(est.mean_attempts_relay),
            mean_airtime_ms: Some(est.mean_airtime_ms),
        }
    }

    pub fn oneshot(variable: &str, value: f64, est: &LossEstimate) -> Self {
        MetricRow {
            sweep_variable: variable.to_string(),
            value,
            scheme: Scheme::OneShot,
            loss: est.loss,
            std_error: est.std_error,
            episodes: est.episodes,
            mean_attempts_source: None,
            mean_attempts_relay: None,
            mean_airtime_ms: None,
        }
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{:e},{:e},{},{},{},{}",
            self.sweep_variable,
            self.value,
            self.scheme.name(),
            self.loss,
            self.std_error,
            self.episodes,
            opt(self.mean_attempts_source),
            opt(self.mean_attempts_relay),
            opt(self.mean_airtime_ms),
        )
    }
}

pub fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Reward trace of one agent: raw per-episode reward and its trailing
/// moving average. Episodes where the agent was idle have empty cells.
pub fn reward_trace_csv(log: &RewardLog, hop: Hop, window: usize) -> String {
    let values: Vec<Option<f64>> = match hop {
        Hop::Source => log.source.iter().map(|&r| Some(r)).collect(),
        Hop::Relay => log.relay.clone(),
    };
    let smooth = moving_average(&values, window);
    let mut out = String::from("episode,reward,moving_average\n");
    for (k, (v, s)) in values.iter().zip(&smooth).enumerate() {
        let cell = |x: &Option<f64>| x.map(|x| format!("{x:e}")).unwrap_or_default();
        let _ = writeln!(out, "{k},{},{}", cell(v), cell(s));
    }
    out
}
