//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the crate's numerical routines.

#![allow(dead_code)]

use std::f64::consts::{LN_2, PI};

use ndarray::Array2;
use rand::Rng;
use relay_urllc::dqn::QNetwork;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

/// Gaussian upper tail by quadrature of the density. All terms are
/// positive, so relative accuracy holds deep in the tail.
pub fn gaussian_tail(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - gaussian_tail(-x);
    }
    let rule = gauss_legendre(16);
    integrate(normal_pdf, x, x + 12.0, 48, &rule)
}

/// Normal-approximation block error probability from its textbook form
/// `Q((C - R) / sqrt(V / m))` with capacity and dispersion in bits.
pub fn fbl_reference(snr: f64, m: u32, h: u32) -> f64 {
    let m = f64::from(m);
    let capacity = (1.0 + snr).log2();
    let dispersion = (1.0 - 1.0 / ((1.0 + snr) * (1.0 + snr))) * std::f64::consts::LOG2_E.powi(2);
    let rate = f64::from(h) / m;
    gaussian_tail((capacity - rate) / (dispersion / m).sqrt()).clamp(0.0, 1.0)
}

/// Expectation of `g(gamma)` for `gamma ~ Exp(mean)`, integrated in
/// `ln gamma` over `[mean * 1e-14, mean * 60]`.
pub fn rayleigh_expectation<F: FnMut(f64) -> f64>(mean: f64, mut g: F) -> f64 {
    let rule = gauss_legendre(16);
    let (lo, hi) = ((mean * 1e-14).ln(), (mean * 60.0).ln());
    integrate(
        |t| {
            let gamma = t.exp();
            let x = gamma / mean;
            g(gamma) * x * (-x).exp()
        },
        lo,
        hi,
        1200,
        &rule,
    )
}

/// Delivery-time outage for a Shannon-rate link: `H / (W log2(1 + gamma)) > tau`.
pub fn shannon_delivery_late(gamma: f64, latency_ms: f64, payload_bits: u32, bandwidth_hz: f64) -> bool {
    let rate = bandwidth_hz * (1.0 + gamma).log2();
    f64::from(payload_bits) / rate > latency_ms * 1e-3
}

pub fn ln2() -> f64 {
    LN_2
}

/// Outcome distribution of one hop under a policy that depends only on the
/// remaining budget. With the SNR fixed for the whole hop, the remaining
/// budget after `k` failed attempts is deterministic, so the hop is a chain:
/// attempt `k` happens with probability `prod_{j<k} eps_j`. Returns
/// `(probability, remaining budget)` for each successful termination that
/// does not overrun the budget.
pub fn hop_success_paths(
    snr: f64,
    budget_ms: f64,
    max_attempts: u32,
    payload_bits: u32,
    policy: &dyn Fn(f64) -> usize,
    cost_ms: &dyn Fn(usize) -> f64,
    blocklength: &dyn Fn(usize) -> u32,
    tolerance_ms: f64,
) -> Vec<(f64, f64)> {
    let mut paths = Vec::new();
    let (mut reach, mut tau) = (1.0, budget_ms);
    for _ in 0..max_attempts {
        if reach < 1e-12 {
            break;
        }
        let a = policy(tau);
        let next = tau - cost_ms(a);
        if next < -tolerance_ms {
            break;
        }
        let eps = fbl_reference(snr, blocklength(a), payload_bits);
        paths.push((reach * (1.0 - eps), next));
        reach *= eps;
        tau = next;
    }
    paths
}

/// Random inputs in [-2, 2) whose hidden pre-activations all stay at least
/// `margin` away from the ReLU kink, so central differences never straddle it.
pub fn kink_free_batch<R: Rng>(net: &QNetwork, batch: usize, margin: f64, rng: &mut R) -> Array2<f64> {
    let last = net.layers.len() - 1;
    loop {
        let states = Array2::from_shape_fn((batch, net.input_dim()), |_| rng.random_range(-2.0..2.0));
        let mut x = states.clone();
        let mut clear = true;
        for layer in &net.layers[..last] {
            let z = x.dot(&layer.weights) + &layer.bias;
            clear &= z.iter().all(|v| v.abs() >= margin);
            x = z.mapv(|v| v.max(0.0));
        }
        if clear {
            return states;
        }
    }
}
