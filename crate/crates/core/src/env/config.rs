use crate::error::EnvError;
use crate::phy::LinkBudget;

/// Default bandwidth, Hz.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 480_000.0;
/// Default noise power spectral density, W/Hz (-110 dBm/Hz).
pub const DEFAULT_NOISE_PSD_W_PER_HZ: f64 = 1e-14;

/// How decoding outcomes are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecodeModel {
    /// Normal approximation at the attempt's blocklength.
    FiniteBlocklength,
    /// Every attempt fails with the given probability regardless of SNR.
    /// Used as a channel stub in tests.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub bandwidth_hz: f64,
    pub latency_budget_ms: f64,
    pub payload_bits: u32,
    /// S to R link.
    pub source_link: LinkBudget,
    /// R to D link.
    pub relay_link: LinkBudget,
    /// Attempts per hop before the hop is declared failed.
    pub max_attempts: u32,
    pub decode_model: DecodeModel,
    /// Payload normalization constant for agent observations.
    pub payload_scale_bits: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        let noise = DEFAULT_NOISE_PSD_W_PER_HZ * DEFAULT_BANDWIDTH_HZ;
        EnvConfig {
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            latency_budget_ms: 2.0,
            payload_bits: 256,
            source_link: LinkBudget::from_dbm(30.0, 500.0, 2.0, noise).expect("valid default"),
            relay_link: LinkBudget::from_dbm(30.0, 500.0, 2.0, noise).expect("valid default"),
            max_attempts: 64,
            decode_model: DecodeModel::FiniteBlocklength,
            payload_scale_bits: 256.0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |what: &str| Err(EnvError::InvalidConfig(what.to_string()));
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if !(self.latency_budget_ms > 0.0 && self.latency_budget_ms.is_finite()) {
            return bad("latency budget must be positive");
        }
        if self.payload_bits == 0 {
            return bad("payload must be at least one bit");
        }
        if self.max_attempts == 0 {
            return bad("attempt cap must be at least one");
        }
        if !(self.payload_scale_bits > 0.0) {
            return bad("payload scale must be positive");
        }
        if let DecodeModel::Constant(p) = self.decode_model {
            if !(0.0..=1.0).contains(&p) {
                return bad("constant decode error probability must lie in [0, 1]");
            }
        }
        for link in [&self.source_link, &self.relay_link] {
            LinkBudget::new(link.tx_power_w, link.distance_m, link.path_loss_exp, link.noise_power_w)?;
        }
        Ok(())
    }

    /// Moves the relay along the S-D line: `d1 = source_distance`, `d2 = total - d1`.
    pub fn with_relay_position(mut self, source_distance_m: f64, total_distance_m: f64) -> Self {
        self.source_link.distance_m = source_distance_m;
        self.relay_link.distance_m = total_distance_m - source_distance_m;
        self
    }

    pub fn with_latency_budget(mut self, latency_ms: f64) -> Self {
        self.latency_budget_ms = latency_ms;
        self
    }
}
