mod common;

use std::collections::HashMap;

use relay_urllc::env::{EnvConfig, HopState, Observation, RelayEnv};
use relay_urllc::harness::estimate_packet_loss;
use relay_urllc::phy::LATENCY_TOLERANCE_MS;

use common::{hop_success_paths, rayleigh_expectation};

fn env() -> RelayEnv {
    RelayEnv::new(EnvConfig::default()).unwrap()
}

/// action index of (mu, n_sym, mcs)
fn idx(mu: usize, n_sym: usize, mcs: usize) -> usize {
    let slot = [2, 4, 7, 14].iter().position(|&n| n == n_sym).unwrap();
    mu * 60 + slot * 15 + mcs - 1
}

fn budget_policy(tau: f64) -> usize {
    if tau > 1.2 {
        idx(1, 7, 14)
    } else if tau > 0.5 {
        idx(3, 4, 12)
    } else {
        idx(4, 2, 8)
    }
}

fn semi_analytic_loss(env: &RelayEnv) -> f64 {
    let cfg = env.config();
    let cost = |a: usize| env.attempt_cost_ms(a);
    let m = |a: usize| env.blocklength(a);
    let hop = |snr: f64, budget: f64| {
        hop_success_paths(snr, budget, cfg.max_attempts, cfg.payload_bits, &budget_policy, &cost, &m, LATENCY_TOLERANCE_MS)
    };
    // Hop 1 can only leave a handful of distinct budgets behind.
    let mut relay_success: HashMap<u64, f64> = HashMap::new();
    rayleigh_expectation(cfg.source_link.avg_snr(), |g| {
        for (_, tau) in hop(g, cfg.latency_budget_ms) {
            relay_success.entry(tau.to_bits()).or_insert(f64::NAN);
        }
        0.0
    });
    for (bits, s) in relay_success.iter_mut() {
        let budget = f64::from_bits(*bits);
        *s = rayleigh_expectation(cfg.relay_link.avg_snr(), |g| hop(g, budget).iter().map(|p| p.0).sum());
    }
    let delivered = rayleigh_expectation(cfg.source_link.avg_snr(), |g| {
        hop(g, cfg.latency_budget_ms).iter().map(|&(p, tau)| p * relay_success[&tau.to_bits()]).sum()
    });
    1.0 - delivered
}

#[test]
fn fixed_policy_loss_matches_attempt_enumeration() {
    let env = env();
    let expected = semi_analytic_loss(&env);
    let n = 1_000_000;
    let policy = || {
        let f = |s: &HopState, _: &Observation| budget_policy(s.remaining_latency_ms);
        (f, f)
    };
    let est = estimate_packet_loss(&env, n, 42, policy);
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    println!("oracle {expected:e} simulated {:e} se {se:e} attempts {} {}", est.loss, est.mean_attempts_source, est.mean_attempts_relay);
    assert!((est.loss - expected).abs() <= 3.0 * se);
}
