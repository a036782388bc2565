//! Environment-to-agent adapter: maps physical hop states onto the
//! normalized 4-vector fed to Q-networks.

use super::HopState;

pub const OBS_DIM: usize = 4;

/// SNRs are clipped to this range (dB) before scaling to [-1, 1].
pub const SNR_DB_MIN: f64 = -20.0;
pub const SNR_DB_MAX: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Linear SNR to [-1, 1]; `+inf` maps to the upper clip.
pub fn normalize_snr(snr: f64) -> f64 {
    let db = if snr.is_infinite() && snr > 0.0 {
        SNR_DB_MAX
    } else {
        (10.0 * snr.log10()).clamp(SNR_DB_MIN, SNR_DB_MAX)
    };
    let mid = 0.5 * (SNR_DB_MIN + SNR_DB_MAX);
    (db - mid) / (0.5 * (SNR_DB_MAX - SNR_DB_MIN))
}

pub fn observe(state: &HopState, latency_budget_ms: f64, payload_scale_bits: f64) -> Observation {
    Observation([
        normalize_snr(state.instant_snr),
        normalize_snr(state.next_hop_avg_snr),
        f64::from(state.payload_bits) / payload_scale_bits,
        state.remaining_latency_ms.max(0.0) / latency_budget_ms,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_scaling() {
        assert_eq!(normalize_snr(f64::INFINITY), 1.0);
        assert_eq!(normalize_snr(1e9), 1.0);
        assert_eq!(normalize_snr(1e-5), -1.0);
        assert!((normalize_snr(100.0) - 0.0).abs() < 1e-15);
        assert!((normalize_snr(1e4) - 0.5).abs() < 1e-15);
    }
}
