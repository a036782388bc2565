//! Two-hop decode-and-forward relay MDP.
//!
//! Each hop is its own episodic process. The transmitting node (source on
//! hop 1, relay on hop 2) picks a [`ResourceAction`] per attempt; the
//! attempt consumes its TTI plus one ARQ symbol from the remaining latency
//! budget and is decoded with the finite-blocklength error probability at
//! the hop's quasi-static SNR. The hop ends in `Success` on the first
//! decoded attempt that fits the budget, and in `Failure` once an attempt
//! overruns the budget (or the attempt cap is hit).

mod config;
mod observe;
mod record;

use rand::Rng;

pub use config::{DecodeModel, EnvConfig, DEFAULT_BANDWIDTH_HZ, DEFAULT_NOISE_PSD_W_PER_HZ};
pub use observe::{normalize_snr, observe, Observation, OBS_DIM, SNR_DB_MAX, SNR_DB_MIN};
pub use record::{AttemptRecord, EpisodeRecord};

use crate::error::EnvError;
use crate::phy::{
    arq_duration_ms, fbl_error_prob, sample_instant_snr, subcarrier_count, FblQuery, MiniSlot, Numerology,
    ResourceAction, LATENCY_TOLERANCE_MS, MCS_TABLE,
};

/// Reward for an attempt that neither succeeds nor fails the hop.
pub const RETRY_REWARD: f64 = -0.1;
/// Reward for entering the failure state.
pub const FAILURE_REWARD: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hop {
    /// S to R, driven by the source agent.
    Source,
    /// R to D, driven by the relay agent.
    Relay,
}

impl Hop {
    pub fn number(self) -> u8 {
        match self {
            Hop::Source => 1,
            Hop::Relay => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Hop> {
        match n {
            1 => Some(Hop::Source),
            2 => Some(Hop::Relay),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalStatus {
    Success,
    Failure,
    Ongoing,
}

/// What an agent knows before an attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopState {
    pub hop: Hop,
    /// Linear SNR of the agent's own link, fixed for the whole hop.
    pub instant_snr: f64,
    /// Average SNR of the next hop; `f64::INFINITY` on the last hop.
    pub next_hop_avg_snr: f64,
    pub payload_bits: u32,
    pub remaining_latency_ms: f64,
    /// Attempts already made on this hop.
    pub attempts: u32,
    pub status: TerminalStatus,
}

impl HopState {
    pub fn is_terminal(&self) -> bool {
        self.status != TerminalStatus::Ongoing
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub next_state: HopState,
    pub reward: f64,
    pub decode_error: bool,
    /// Error probability the decode outcome was drawn from.
    pub error_prob: f64,
    pub tti_ms: f64,
    pub arq_ms: f64,
}

impl StepResult {
    pub fn time_spent_ms(&self) -> f64 {
        self.tti_ms + self.arq_ms
    }
}

/// Anything that can pick an action index for a hop state.
pub trait HopPolicy {
    fn select(&mut self, state: &HopState, obs: &Observation) -> usize;
}

impl<F> HopPolicy for F
where
    F: FnMut(&HopState, &Observation) -> usize,
{
    fn select(&mut self, state: &HopState, obs: &Observation) -> usize {
        self(state, obs)
    }
}

/// Every (numerology, mini-slot, MCS) tuple usable at this bandwidth, in
/// numerology-major, then mini-slot, then MCS order.
pub fn action_space(bandwidth_hz: f64) -> Vec<ResourceAction> {
    let mut actions = Vec::with_capacity(300);
    for numerology in Numerology::ALL {
        if subcarrier_count(numerology, bandwidth_hz) == 0 {
            continue;
        }
        for mini_slot in MiniSlot::ALL {
            for mcs in MCS_TABLE {
                actions.push(ResourceAction { numerology, mini_slot, mcs });
            }
        }
    }
    actions
}

/// Delay outage rate: probability that a Rayleigh link with mean SNR
/// `avg_snr` needs more than `latency_ms` to push `payload_bits` at
/// Shannon rate over `bandwidth_hz`.
pub fn dor(avg_snr: f64, latency_ms: f64, payload_bits: u32, bandwidth_hz: f64) -> f64 {
    if avg_snr.is_infinite() && avg_snr > 0.0 {
        return 0.0;
    }
    if !(latency_ms > 0.0) {
        return 1.0;
    }
    let exponent = f64::from(payload_bits) / (bandwidth_hz * latency_ms * 1e-3);
    let snr_needed = exponent.exp2() - 1.0;
    (-(-snr_needed / avg_snr).exp_m1()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ActionCost {
    tti_ms: f64,
    arq_ms: f64,
    blocklength: u32,
}

#[derive(Debug, Clone)]
pub struct RelayEnv {
    config: EnvConfig,
    actions: Vec<ResourceAction>,
    costs: Vec<ActionCost>,
}

impl RelayEnv {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let actions = action_space(config.bandwidth_hz);
        if actions.is_empty() {
            return Err(EnvError::EmptyActionSpace);
        }
        let costs = actions
            .iter()
            .map(|a| {
                Ok(ActionCost {
                    tti_ms: a.tti_ms(config.payload_bits, config.bandwidth_hz)?,
                    arq_ms: arq_duration_ms(a.numerology),
                    blocklength: a.blocklength(config.payload_bits),
                })
            })
            .collect::<Result<Vec<_>, EnvError>>()?;
        Ok(RelayEnv { config, actions, costs })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn actions(&self) -> &[ResourceAction] {
        &self.actions
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn action_index(&self, action: &ResourceAction) -> Option<usize> {
        self.actions.iter().position(|a| a == action)
    }

    /// Airtime of one attempt with this action: TTI plus ARQ symbol.
    pub fn attempt_cost_ms(&self, action: usize) -> f64 {
        let c = &self.costs[action];
        c.tti_ms + c.arq_ms
    }

    pub fn tti_ms(&self, action: usize) -> f64 {
        self.costs[action].tti_ms
    }

    pub fn arq_ms(&self, action: usize) -> f64 {
        self.costs[action].arq_ms
    }

    pub fn blocklength(&self, action: usize) -> u32 {
        self.costs[action].blocklength
    }

    pub fn avg_snr(&self, hop: Hop) -> f64 {
        match hop {
            Hop::Source => self.config.source_link.avg_snr(),
            Hop::Relay => self.config.relay_link.avg_snr(),
        }
    }

    pub fn next_hop_avg_snr(&self, hop: Hop) -> f64 {
        match hop {
            Hop::Source => self.config.relay_link.avg_snr(),
            Hop::Relay => f64::INFINITY,
        }
    }

    /// Decoding error probability of `action` at instantaneous SNR `snr`.
    pub fn error_prob(&self, snr: f64, action: usize) -> f64 {
        match self.config.decode_model {
            DecodeModel::Constant(p) => p,
            DecodeModel::FiniteBlocklength => {
                let q = FblQuery::new(snr, self.costs[action].blocklength, self.config.payload_bits);
                // Underflow to an exact zero SNR only happens for astronomically deep fades.
                fbl_error_prob(q).unwrap_or(1.0)
            }
        }
    }

    /// Hop state with a given channel realization.
    pub fn hop_state(&self, hop: Hop, instant_snr: f64, latency_ms: f64) -> HopState {
        HopState {
            hop,
            instant_snr,
            next_hop_avg_snr: self.next_hop_avg_snr(hop),
            payload_bits: self.config.payload_bits,
            remaining_latency_ms: latency_ms.max(0.0),
            attempts: 0,
            status: TerminalStatus::Ongoing,
        }
    }

    /// Starts a hop with a fresh fading draw and `latency_ms` of budget.
    pub fn reset_hop<R: Rng + ?Sized>(&self, hop: Hop, latency_ms: f64, rng: &mut R) -> HopState {
        let snr = sample_instant_snr(self.avg_snr(hop), rng);
        self.hop_state(hop, snr, latency_ms)
    }

    pub fn observe(&self, state: &HopState) -> Observation {
        observe(state, self.config.latency_budget_ms, self.config.payload_scale_bits)
    }

    /// One (re)transmission attempt. Draws exactly one uniform from `rng`.
    pub fn step<R: Rng + ?Sized>(&self, state: &HopState, action: usize, rng: &mut R) -> Result<StepResult, EnvError> {
        if state.is_terminal() {
            return Err(EnvError::SteppedTerminal(state.status));
        }
        if action >= self.actions.len() {
            return Err(EnvError::ActionOutOfRange { index: action, len: self.actions.len() });
        }
        let cost = self.costs[action];
        let error_prob = self.error_prob(state.instant_snr, action);
        let decode_error = rng.random::<f64>() < error_prob;
        let remaining = state.remaining_latency_ms - cost.tti_ms - cost.arq_ms;
        let attempts = state.attempts + 1;

        let (status, reward) = if remaining < -LATENCY_TOLERANCE_MS {
            (TerminalStatus::Failure, FAILURE_REWARD)
        } else if !decode_error {
            let outage = dor(
                state.next_hop_avg_snr,
                remaining,
                self.config.payload_bits,
                self.config.bandwidth_hz,
            );
            (TerminalStatus::Success, 1.0 - outage)
        } else if attempts >= self.config.max_attempts {
            (TerminalStatus::Failure, FAILURE_REWARD)
        } else {
            (TerminalStatus::Ongoing, RETRY_REWARD)
        };

        Ok(StepResult {
            next_state: HopState { remaining_latency_ms: remaining, attempts, status, ..*state },
            reward,
            decode_error,
            error_prob,
            tti_ms: cost.tti_ms,
            arq_ms: cost.arq_ms,
        })
    }

    /// Drives one hop to a terminal state, appending its attempts to `record`.
    fn run_hop<P, R>(&self, mut state: HopState, policy: &mut P, rng: &mut R, record: &mut EpisodeRecord) -> HopState
    where
        P: HopPolicy + ?Sized,
        R: Rng + ?Sized,
    {
        while !state.is_terminal() {
            let obs = self.observe(&state);
            let action = policy.select(&state, &obs);
            let result = self.step(&state, action, rng).expect("policy returned an illegal action");
            record.push(AttemptRecord {
                hop: state.hop,
                attempt: result.next_state.attempts,
                action_index: action,
                action: self.actions[action],
                instant_snr: state.instant_snr,
                next_hop_avg_snr: state.next_hop_avg_snr,
                remaining_before_ms: state.remaining_latency_ms,
                tti_ms: result.tti_ms,
                arq_ms: result.arq_ms,
                decode_error: result.decode_error,
                reward: result.reward,
            });
            state = result.next_state;
        }
        state
    }

    /// Delivers one packet: hop 1 to a terminal state, then hop 2 on the
    /// remaining budget if hop 1 succeeded.
    pub fn run_episode<P1, P2, R>(&self, source: &mut P1, relay: &mut P2, rng: &mut R) -> EpisodeRecord
    where
        P1: HopPolicy + ?Sized,
        P2: HopPolicy + ?Sized,
        R: Rng + ?Sized,
    {
        let mut record = EpisodeRecord::default();
        let first = self.reset_hop(Hop::Source, self.config.latency_budget_ms, rng);
        let first = self.run_hop(first, source, rng, &mut record);
        record.source_status = first.status;
        if first.status == TerminalStatus::Success && first.remaining_latency_ms >= -LATENCY_TOLERANCE_MS {
            let second = self.reset_hop(Hop::Relay, first.remaining_latency_ms, rng);
            let second = self.run_hop(second, relay, rng, &mut record);
            record.relay_status = Some(second.status);
        }
        record
    }
}
