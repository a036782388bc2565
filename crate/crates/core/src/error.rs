use thiserror::Error;

/// Errors raised by the physical-layer model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("numerology {mu} is infeasible for a bandwidth of {bandwidth_hz} Hz (no full subcarrier)")]
    InfeasibleNumerology { mu: u8, bandwidth_hz: f64 },
    #[error("invalid numerology index {0}, expected 0..=4")]
    InvalidNumerology(u8),
    #[error("invalid mini-slot size {0}, expected one of 2, 4, 7, 14")]
    InvalidMiniSlot(u8),
    #[error("invalid MCS index {0}, expected 1..=15")]
    InvalidMcs(u8),
    #[error("SNR must be positive and finite, got {0}")]
    NonPositiveSnr(f64),
    #[error("blocklength and payload must be at least 1 (m = {blocklength}, H = {payload})")]
    EmptyBlock { blocklength: u32, payload: u32 },
    #[error("{0} must be positive and finite, got {1}")]
    NonPositive(&'static str, f64),
}

/// Errors raised while stepping or configuring the relay environment.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error("cannot step a terminal hop state ({0:?})")]
    SteppedTerminal(crate::env::TerminalStatus),
    #[error("action index {index} out of range for an action space of {len}")]
    ActionOutOfRange { index: usize, len: usize },
    #[error("the configured bandwidth admits no numerology")]
    EmptyActionSpace,
    #[error("invalid environment configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed episode trace at line {line}: {reason}")]
    Trace { line: usize, reason: String },
}

/// Errors raised by the deep Q-learning components.
#[derive(Debug, Error)]
pub enum DqnError {
    #[error("observation contains a non-finite value")]
    NonFiniteInput,
    #[error("observation has {got} entries, network expects {expected}")]
    InputShape { expected: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    Hyperparams(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
