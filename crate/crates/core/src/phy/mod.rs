//! Closed-form physical-layer model: NR timing, MCS table, finite-blocklength
//! error probability and Rayleigh SNR sampling.

mod channel;
mod fbl;
mod mcs;
mod timing;

pub use crate::error::PhyError;
pub use channel::{dbm_to_watts, sample_instant_snr, LinkBudget};
pub use fbl::{capacity_matching_snr, fbl_error_prob, q_function, FblQuery};
pub use mcs::{McsEntry, MCS_TABLE};
pub use timing::{
    arq_duration_ms, subcarrier_count, subframe_duration_ms, subframes_needed, symbols_needed, tti_ms,
    MiniSlot, Numerology, ResourceAction, BASE_SPACING_HZ, SYMBOLS_PER_SLOT,
};

/// Absolute tolerance for comparisons against a latency budget, in ms.
pub const LATENCY_TOLERANCE_MS: f64 = 1e-9;
