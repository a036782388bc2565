//! Latency-constrained two-hop relaying over 5G NR.
//!
//! * [`phy`]: NR timing, MCS table, finite-blocklength error model, fading.
//! * [`env`]: the per-hop MDP shared by the source and relay agents.
//! * [`dqn`]: a dependency-light deep Q-learning stack and the dual-agent trainer.
//! * [`baseline`]: the global-CSI one-shot allocation benchmark.
//! * [`harness`]: experiment configuration, sweeps and metric files.

pub mod baseline;
pub mod dqn;
pub mod env;
pub mod error;
pub mod harness;
pub mod phy;
pub mod seed;
