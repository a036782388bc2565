//! Large-scale link budget and Rayleigh block fading.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::PhyError;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Path-loss link budget of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub distance_m: f64,
    pub path_loss_exp: f64,
    pub noise_power_w: f64,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, distance_m: f64, path_loss_exp: f64, noise_power_w: f64) -> Result<Self, PhyError> {
        for (name, v) in [
            ("transmit power", tx_power_w),
            ("distance", distance_m),
            ("path-loss exponent", path_loss_exp),
            ("noise power", noise_power_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhyError::NonPositive(name, v));
            }
        }
        Ok(LinkBudget { tx_power_w, distance_m, path_loss_exp, noise_power_w })
    }

    pub fn from_dbm(tx_power_dbm: f64, distance_m: f64, path_loss_exp: f64, noise_power_w: f64) -> Result<Self, PhyError> {
        Self::new(dbm_to_watts(tx_power_dbm), distance_m, path_loss_exp, noise_power_w)
    }

    /// Mean linear SNR `P d^-eta / sigma^2`.
    pub fn avg_snr(&self) -> f64 {
        self.tx_power_w * self.distance_m.powf(-self.path_loss_exp) / self.noise_power_w
    }
}

/// Draws one instantaneous SNR: exponential with mean `avg_snr`.
pub fn sample_instant_snr<R: Rng + ?Sized>(avg_snr: f64, rng: &mut R) -> f64 {
    Exp::new(1.0 / avg_snr).expect("positive average SNR").sample(rng)
}
