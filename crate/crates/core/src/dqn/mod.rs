//! Deep Q-learning from scratch: MLP, Adam, replay memory, epsilon-greedy
//! exploration, target networks and the dual-agent training loop.

mod adam;
mod agent;
mod checkpoint;
mod mlp;
mod replay;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use agent::{
    epsilon_greedy, moving_average, td_targets, train_dual, train_hop, AgentState, DualTrainer, EpisodeSummary,
    GreedyPolicy, HopOutcome, Hyperparams, RewardLog, TrainedAgents,
};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use mlp::{argmax, stack_rows, Dense, Gradient, QNetwork};
pub use replay::{ReplayBuffer, Transition};
