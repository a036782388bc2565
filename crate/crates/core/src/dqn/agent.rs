//! Epsilon-greedy acting, TD targets and the per-hop / dual-agent training
//! loops.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::mlp::{argmax, stack_rows, QNetwork};
use super::replay::{ReplayBuffer, Transition};
use crate::env::{Hop, HopPolicy, HopState, Observation, RelayEnv, TerminalStatus, OBS_DIM};
use crate::error::DqnError;
use crate::phy::LATENCY_TOLERANCE_MS;
use crate::seed::{rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub episodes: u64,
    /// Target network sync period, in episodes.
    pub target_sync_period: u64,
    pub discount: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    /// Per-episode multiplicative decay of epsilon.
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub hidden_layers: Vec<usize>,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            episodes: 100_000,
            target_sync_period: 2_000,
            discount: 0.95,
            learning_rate: 1e-5,
            epsilon_start: 1.0,
            epsilon_decay: 0.999,
            epsilon_floor: 0.0,
            buffer_capacity: 10_000,
            batch_size: 64,
            hidden_layers: vec![64, 256, 128],
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), DqnError> {
        let bad = |s: &str| Err(DqnError::Hyperparams(s.to_string()));
        if !(0.0..=1.0).contains(&self.discount) {
            return bad("discount must lie in [0, 1]");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon decay must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_floor) {
            return bad("epsilon start and floor must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.target_sync_period == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("sync period, batch size and buffer capacity must be positive");
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig { beta1: self.adam_beta1, beta2: self.adam_beta2, epsilon: self.adam_epsilon }
    }

    /// Exploration rate used during episode `episode` (0-based).
    pub fn epsilon_at(&self, episode: u64) -> f64 {
        let mut eps = self.epsilon_start;
        for _ in 0..episode {
            eps = (eps * self.epsilon_decay).max(self.epsilon_floor);
        }
        eps
    }

    pub fn layer_sizes(&self, num_actions: usize) -> Vec<usize> {
        let mut sizes = vec![OBS_DIM];
        sizes.extend(&self.hidden_layers);
        sizes.push(num_actions);
        sizes
    }
}

/// Uniform random action with probability `epsilon`, otherwise the greedy
/// one. Always consumes one uniform draw.
pub fn epsilon_greedy<R: Rng + ?Sized>(net: &QNetwork, obs: &Observation, epsilon: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..net.output_dim())
    } else {
        argmax(&net.forward(obs.as_slice()).expect("environment observations are finite"))
    }
}

/// `y = r` at terminal transitions, `y = r + discount * max_a' Q_target(s', a')` otherwise.
pub fn td_targets(batch: &[&Transition], target: &QNetwork, discount: f64) -> Vec<f64> {
    let live: Vec<&[f64]> = batch.iter().filter_map(|t| t.next_state.as_ref().map(|o| o.as_slice())).collect();
    let mut bootstrap = Vec::new();
    if !live.is_empty() && discount != 0.0 {
        let q = target.forward_batch(stack_rows(live, target.input_dim()).view());
        bootstrap = q.rows().into_iter().map(|r| r.fold(f64::NEG_INFINITY, |m, &v| m.max(v))).collect();
    }
    let mut next = bootstrap.into_iter();
    batch
        .iter()
        .map(|t| match t.next_state {
            None => t.reward,
            Some(_) if discount == 0.0 => t.reward,
            Some(_) => t.reward + discount * next.next().expect("one value per live transition"),
        })
        .collect()
}

/// Main and target networks, optimizer state and replay memory of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub main: QNetwork,
    pub target: QNetwork,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
}

impl AgentState {
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], buffer_capacity: usize, rng: &mut R) -> Self {
        let main = QNetwork::new(sizes, rng);
        AgentState {
            target: main.clone(),
            adam: AdamState::new(&main),
            main,
            buffer: ReplayBuffer::new(buffer_capacity),
        }
    }

    pub fn sync_target(&mut self) {
        self.target.copy_from(&self.main);
    }

    /// One gradient step on a uniformly sampled mini-batch. Returns the loss,
    /// or `None` while the buffer holds less than one batch.
    pub fn learn<R: Rng + ?Sized>(&mut self, hyper: &Hyperparams, rng: &mut R) -> Option<f64> {
        if self.buffer.len() < hyper.batch_size {
            return None;
        }
        let batch = self.buffer.sample(hyper.batch_size, rng);
        let targets = td_targets(&batch, &self.target, hyper.discount);
        let states: Array2<f64> = stack_rows(batch.iter().map(|t| t.state.as_slice()), OBS_DIM);
        let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
        let (loss, grad) = self.main.loss_and_grad(states.view(), &actions, &targets);
        adam_step(&mut self.main, &grad, &mut self.adam, hyper.learning_rate, &hyper.adam());
        Some(loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopOutcome {
    /// Budget left after the last attempt (may be negative on overrun).
    pub remaining_latency_ms: f64,
    pub done: bool,
    pub status: TerminalStatus,
    pub reward_sum: f64,
    pub attempts: u32,
}

/// Plays one hop to a terminal state with epsilon-greedy actions, storing
/// every transition and taking one gradient step after each attempt.
pub fn train_hop<R: Rng + ?Sized>(
    agent: &mut AgentState,
    env: &RelayEnv,
    initial: HopState,
    epsilon: f64,
    hyper: &Hyperparams,
    rng: &mut R,
) -> HopOutcome {
    let mut state = initial;
    let mut reward_sum = 0.0;
    while !state.is_terminal() {
        let obs = env.observe(&state);
        let action = epsilon_greedy(&agent.main, &obs, epsilon, rng);
        let step = env.step(&state, action, rng).expect("action drawn from the network's output range");
        reward_sum += step.reward;
        let next = step.next_state;
        agent.buffer.push(Transition {
            state: obs,
            action,
            reward: step.reward,
            next_state: (!next.is_terminal()).then(|| env.observe(&next)),
        });
        agent.learn(hyper, rng);
        state = next;
    }
    HopOutcome {
        remaining_latency_ms: state.remaining_latency_ms,
        done: true,
        status: state.status,
        reward_sum,
        attempts: state.attempts,
    }
}

/// Per-episode accumulated reward of each agent. The relay entry is `None`
/// for episodes in which hop 2 never started.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardLog {
    pub source: Vec<f64>,
    pub relay: Vec<Option<f64>>,
}

impl RewardLog {
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Mean over `range` of episodes, skipping episodes where the agent was idle.
    pub fn mean(&self, hop: Hop, range: std::ops::Range<usize>) -> Option<f64> {
        let vals: Vec<f64> = match hop {
            Hop::Source => self.source[range].to_vec(),
            Hop::Relay => self.relay[range].iter().flatten().copied().collect(),
        };
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Trailing moving average over a window, ignoring idle episodes.
pub fn moving_average(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let (mut sum, mut count) = (0.0, 0usize);
    for k in 0..values.len() {
        if let Some(v) = values[k] {
            sum += v;
            count += 1;
        }
        if k >= window {
            if let Some(v) = values[k - window] {
                sum -= v;
                count -= 1;
            }
        }
        out.push((count > 0).then(|| sum / count as f64));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub episode: u64,
    pub epsilon: f64,
    pub source: HopOutcome,
    pub relay: Option<HopOutcome>,
}

impl EpisodeSummary {
    pub fn delivered(&self) -> bool {
        self.relay.is_some_and(|r| r.status == TerminalStatus::Success)
    }
}

/// Dual-agent training: the source agent learns hop 1, the relay agent
/// hop 2 on whatever budget hop 1 left.
#[derive(Debug, Clone)]
pub struct DualTrainer {
    pub(crate) env: RelayEnv,
    pub(crate) hyper: Hyperparams,
    pub source: AgentState,
    pub relay: AgentState,
    pub(crate) epsilon: f64,
    pub(crate) episode: u64,
    pub(crate) rng: SimRng,
    pub log: RewardLog,
}

impl DualTrainer {
    pub fn new(env: RelayEnv, hyper: Hyperparams, seed: u64) -> Result<Self, DqnError> {
        hyper.validate()?;
        let mut rng = rng_from_seed(seed);
        let sizes = hyper.layer_sizes(env.num_actions());
        let source = AgentState::new(&sizes, hyper.buffer_capacity, &mut rng);
        let relay = AgentState::new(&sizes, hyper.buffer_capacity, &mut rng);
        Ok(DualTrainer {
            epsilon: hyper.epsilon_start,
            env,
            hyper,
            source,
            relay,
            episode: 0,
            rng,
            log: RewardLog::default(),
        })
    }

    pub fn env(&self) -> &RelayEnv {
        &self.env
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Episodes completed so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn is_finished(&self) -> bool {
        self.episode >= self.hyper.episodes
    }

    pub fn run_episode(&mut self) -> EpisodeSummary {
        let budget = self.env.config().latency_budget_ms;
        let first = self.env.reset_hop(Hop::Source, budget, &mut self.rng);
        let source = train_hop(&mut self.source, &self.env, first, self.epsilon, &self.hyper, &mut self.rng);

        let mut relay = None;
        if source.status == TerminalStatus::Success && source.remaining_latency_ms >= -LATENCY_TOLERANCE_MS {
            let second = self.env.reset_hop(Hop::Relay, source.remaining_latency_ms, &mut self.rng);
            relay = Some(train_hop(&mut self.relay, &self.env, second, self.epsilon, &self.hyper, &mut self.rng));
        }

        let summary = EpisodeSummary { episode: self.episode, epsilon: self.epsilon, source, relay };
        self.log.source.push(source.reward_sum);
        self.log.relay.push(relay.map(|r| r.reward_sum));

        self.episode += 1;
        self.epsilon = (self.epsilon * self.hyper.epsilon_decay).max(self.hyper.epsilon_floor);
        if self.episode.is_multiple_of(self.hyper.target_sync_period) {
            self.source.sync_target();
            self.relay.sync_target();
        }
        summary
    }

    /// Runs up to `episodes` more episodes without exceeding the configured total.
    pub fn train(&mut self, episodes: u64) {
        for _ in 0..episodes {
            if self.is_finished() {
                break;
            }
            self.run_episode();
        }
    }

    pub fn train_to_completion(&mut self) {
        let left = self.hyper.episodes.saturating_sub(self.episode);
        self.train(left);
    }

    pub fn into_trained(self) -> TrainedAgents {
        TrainedAgents { source: self.source.main, relay: self.relay.main, log: self.log }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedAgents {
    pub source: QNetwork,
    pub relay: QNetwork,
    pub log: RewardLog,
}

/// Full training run from scratch.
pub fn train_dual(env: RelayEnv, hyper: Hyperparams, seed: u64) -> Result<TrainedAgents, DqnError> {
    let mut trainer = DualTrainer::new(env, hyper, seed)?;
    trainer.train_to_completion();
    Ok(trainer.into_trained())
}

/// Greedy (epsilon = 0) policy over a frozen network.
#[derive(Debug, Clone, Copy)]
pub struct GreedyPolicy<'a> {
    pub net: &'a QNetwork,
}

impl HopPolicy for GreedyPolicy<'_> {
    fn select(&mut self, _state: &HopState, obs: &Observation) -> usize {
        argmax(&self.net.forward(obs.as_slice()).expect("environment observations are finite"))
    }
}
