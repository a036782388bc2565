//! Global-CSI one-shot benchmark: a single attempt per hop, with the
//! channel uses split between the hops to minimize the end-to-end error
//! for the realized SNR pair.
//!
//! Airtime accounting: hop 1 takes `n1` subframes of its (numerology,
//! mini-slot) pair, then one OFDM symbol (at hop 1's numerology) for the
//! relay turnaround, then hop 2 takes `n2` subframes of its own pair. The
//! total must fit the latency budget. Each hop's blocklength is its whole
//! resource grid, `n_sf * n_sc * n_sym`, and its rate follows as `H / m`.

use rayon::prelude::*;
use thiserror::Error;

use crate::env::EnvConfig;
use crate::phy::{
    arq_duration_ms, fbl_error_prob, sample_instant_snr, subcarrier_count, subframe_duration_ms, FblQuery,
    MiniSlot, Numerology, PhyError, LATENCY_TOLERANCE_MS,
};
use crate::seed::stream_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("no one-shot allocation fits a {0} ms budget")]
    Infeasible(f64),
    #[error(transparent)]
    Phy(#[from] PhyError),
}

/// `eps1 + (1 - eps1) * eps2`: the packet is lost if either hop fails.
pub fn e2e_error(snr1: f64, snr2: f64, m1: u32, m2: u32, payload_bits: u32) -> Result<f64, PhyError> {
    let e1 = fbl_error_prob(FblQuery::new(snr1, m1, payload_bits))?;
    let e2 = fbl_error_prob(FblQuery::new(snr2, m2, payload_bits))?;
    Ok(e1 + (1.0 - e1) * e2)
}

/// A schedulable (numerology, mini-slot) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub numerology: Numerology,
    pub mini_slot: MiniSlot,
    /// Channel uses per subframe, `n_sc * n_sym`.
    pub symbols_per_subframe: u32,
    pub subframe_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub source: Grid,
    pub relay: Grid,
    pub source_subframes: u32,
    pub relay_subframes: u32,
    pub m1: u32,
    pub m2: u32,
    pub e2e_error: f64,
    pub airtime_ms: f64,
}

/// Precomputed search space for one configuration.
#[derive(Debug, Clone)]
pub struct OneShotPlanner {
    grids: Vec<Grid>,
    payload_bits: u32,
    budget_ms: f64,
    /// Pareto-maximal `(m1, m2)` pairs, `m1` descending.
    frontier: Vec<(u32, u32)>,
}

impl OneShotPlanner {
    pub fn new(config: &EnvConfig) -> Self {
        let mut grids = Vec::new();
        for numerology in Numerology::ALL {
            let n_sc = subcarrier_count(numerology, config.bandwidth_hz);
            if n_sc == 0 {
                continue;
            }
            for mini_slot in MiniSlot::ALL {
                grids.push(Grid {
                    numerology,
                    mini_slot,
                    symbols_per_subframe: n_sc * mini_slot.symbols(),
                    subframe_ms: subframe_duration_ms(numerology, mini_slot),
                });
            }
        }
        let mut planner = OneShotPlanner {
            grids,
            payload_bits: config.payload_bits,
            budget_ms: config.latency_budget_ms,
            frontier: Vec::new(),
        };
        planner.frontier = planner.build_frontier();
        planner
    }

    pub fn grids(&self) -> &[Grid] {
        &self.grids
    }

    pub fn frontier(&self) -> &[(u32, u32)] {
        &self.frontier
    }

    fn time_left_after_hop1(&self, g1: &Grid, n1: u32) -> f64 {
        self.budget_ms - f64::from(n1) * g1.subframe_ms - arq_duration_ms(g1.numerology)
    }

    fn max_subframes(time_ms: f64, grid: &Grid) -> u32 {
        if time_ms < -LATENCY_TOLERANCE_MS {
            return 0;
        }
        ((time_ms + LATENCY_TOLERANCE_MS) / grid.subframe_ms).floor() as u32
    }

    /// Largest hop-1 subframe count that still leaves room for one hop-2 subframe.
    fn max_source_subframes(&self, g1: &Grid) -> u32 {
        let shortest = self.grids.iter().map(|g| g.subframe_ms).fold(f64::INFINITY, f64::min);
        Self::max_subframes(self.budget_ms - arq_duration_ms(g1.numerology) - shortest, g1)
    }

    fn build_frontier(&self) -> Vec<(u32, u32)> {
        let mut pairs = Vec::new();
        for g1 in &self.grids {
            for n1 in 1..=self.max_source_subframes(g1) {
                let left = self.time_left_after_hop1(g1, n1);
                let m2 = self
                    .grids
                    .iter()
                    .map(|g2| Self::max_subframes(left, g2) * g2.symbols_per_subframe)
                    .max()
                    .unwrap_or(0);
                if m2 > 0 {
                    pairs.push((n1 * g1.symbols_per_subframe, m2));
                }
            }
        }
        pairs.sort_by(|a, b| b.cmp(a));
        let mut frontier: Vec<(u32, u32)> = Vec::new();
        for (m1, m2) in pairs {
            if frontier.last().is_none_or(|&(_, best)| m2 > best) {
                frontier.push((m1, m2));
            }
        }
        frontier
    }

    /// Exhaustive search over both hops' grids and subframe counts. Ties go
    /// to the smaller `m1 + m2`, then to the earlier enumeration order
    /// (hop-1 grid, `n1`, hop-2 grid, `n2`).
    pub fn optimize(&self, snr1: f64, snr2: f64) -> Result<Allocation, BaselineError> {
        let h = self.payload_bits;
        let mut cache1: Vec<Option<f64>> = Vec::new();
        let mut cache2: Vec<Option<f64>> = Vec::new();
        let eps = |cache: &mut Vec<Option<f64>>, snr: f64, m: u32| -> Result<f64, PhyError> {
            let k = m as usize;
            if cache.len() <= k {
                cache.resize(k + 1, None);
            }
            if let Some(v) = cache[k] {
                return Ok(v);
            }
            let v = fbl_error_prob(FblQuery::new(snr, m, h))?;
            cache[k] = Some(v);
            Ok(v)
        };

        let mut best: Option<Allocation> = None;
        for g1 in &self.grids {
            for n1 in 1..=self.max_source_subframes(g1) {
                let m1 = n1 * g1.symbols_per_subframe;
                let e1 = eps(&mut cache1, snr1, m1)?;
                let left = self.time_left_after_hop1(g1, n1);
                for g2 in &self.grids {
                    for n2 in 1..=Self::max_subframes(left, g2) {
                        let m2 = n2 * g2.symbols_per_subframe;
                        let e2 = eps(&mut cache2, snr2, m2)?;
                        let err = e1 + (1.0 - e1) * e2;
                        let better = match &best {
                            None => true,
                            Some(b) => err < b.e2e_error || (err == b.e2e_error && m1 + m2 < b.m1 + b.m2),
                        };
                        if better {
                            best = Some(Allocation {
                                source: *g1,
                                relay: *g2,
                                source_subframes: n1,
                                relay_subframes: n2,
                                m1,
                                m2,
                                e2e_error: err,
                                airtime_ms: f64::from(n1) * g1.subframe_ms
                                    + arq_duration_ms(g1.numerology)
                                    + f64::from(n2) * g2.subframe_ms,
                            });
                        }
                    }
                }
            }
        }
        best.ok_or(BaselineError::Infeasible(self.budget_ms))
    }

    /// Minimum end-to-end error over the Pareto frontier of `(m1, m2)`;
    /// equal to `optimize(..).e2e_error`, and 1 when nothing fits.
    pub fn min_error(&self, snr1: f64, snr2: f64) -> f64 {
        let h = self.payload_bits;
        let eps = |snr: f64, m: u32| fbl_error_prob(FblQuery::new(snr, m, h)).unwrap_or(1.0);
        self.frontier
            .iter()
            .map(|&(m1, m2)| {
                let e1 = eps(snr1, m1);
                e1 + (1.0 - e1) * eps(snr2, m2)
            })
            .fold(1.0, f64::min)
    }
}

pub fn optimize_allocation(snr1: f64, snr2: f64, config: &EnvConfig) -> Result<Allocation, BaselineError> {
    OneShotPlanner::new(config).optimize(snr1, snr2)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEstimate {
    pub loss: f64,
    pub std_error: f64,
    pub episodes: u64,
}

/// Draws per RNG stream; streams are seeded `stream_rng(seed, "oneshot", k)`.
pub const BASELINE_CHUNK: u64 = 4096;

/// Average of the optimal one-shot error over `n_episodes` fading draws.
/// The loss is accumulated analytically per draw, not sampled.
pub fn baseline_loss(config: &EnvConfig, n_episodes: u64, seed: u64) -> LossEstimate {
    assert!(n_episodes >= 1, "need at least one episode");
    let planner = OneShotPlanner::new(config);
    let (avg1, avg2) = (config.source_link.avg_snr(), config.relay_link.avg_snr());
    let chunks = n_episodes.div_ceil(BASELINE_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, "oneshot", k);
            let n = BASELINE_CHUNK.min(n_episodes - k * BASELINE_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let g1 = sample_instant_snr(avg1, &mut rng);
                let g2 = sample_instant_snr(avg2, &mut rng);
                let e = planner.min_error(g1, g2);
                s += e;
                s2 += e * e;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = n_episodes as f64;
    let loss = sum / n;
    let var = (sum_sq / n - loss * loss).max(0.0);
    LossEstimate { loss, std_error: (var / n).sqrt(), episodes: n_episodes }
}
