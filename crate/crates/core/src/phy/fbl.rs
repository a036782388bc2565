//! Finite-blocklength decoding error probability (normal approximation).

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::PhyError;

/// Gaussian tail probability `Q(x) = 0.5 * erfc(x / sqrt(2))`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblQuery {
    /// Linear instantaneous SNR.
    pub snr: f64,
    /// Channel uses.
    pub blocklength: u32,
    /// Information bits.
    pub payload: u32,
}

impl FblQuery {
    pub fn new(snr: f64, blocklength: u32, payload: u32) -> Self {
        FblQuery { snr, blocklength, payload }
    }

    /// Channel dispersion `1 - (1 + snr)^-2`.
    pub fn dispersion(&self) -> f64 {
        // -expm1(-2 ln(1+snr)) keeps precision for small SNR.
        -(-2.0 * self.snr.ln_1p()).exp_m1()
    }

    /// Argument of the Q-function.
    pub fn q_argument(&self) -> f64 {
        let m = f64::from(self.blocklength);
        let h = f64::from(self.payload);
        // ln2 * (log2(1+snr) - H/m) == ln(1+snr) - H ln2 / m
        (m / self.dispersion()).sqrt() * (self.snr.ln_1p() - h * LN_2 / m)
    }
}

/// Block error probability for `payload` bits over `blocklength` uses of
/// an AWGN channel at the given SNR. Clamped to `[0, 1]`.
pub fn fbl_error_prob(q: FblQuery) -> Result<f64, PhyError> {
    if !(q.snr > 0.0) || !q.snr.is_finite() {
        return Err(PhyError::NonPositiveSnr(q.snr));
    }
    if q.blocklength == 0 || q.payload == 0 {
        return Err(PhyError::EmptyBlock { blocklength: q.blocklength, payload: q.payload });
    }
    Ok(q_function(q.q_argument()).clamp(0.0, 1.0))
}

/// SNR at which `log2(1 + snr) = H / m`.
pub fn capacity_matching_snr(blocklength: u32, payload: u32) -> f64 {
    (f64::from(payload) / f64::from(blocklength) * LN_2).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(snr: f64, m: u32, h: u32) -> f64 {
        fbl_error_prob(FblQuery::new(snr, m, h)).unwrap()
    }

    #[test]
    fn half_at_capacity() {
        for (m, h) in [(57, 256), (100, 256), (4370, 256), (10, 3)] {
            let g = capacity_matching_snr(m, h);
            assert!((eps(g, m, h) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_snr() {
        assert!(eps(1e8, 57, 256) < 1e-12);
        let low = eps(0.1, 4370, 256);
        assert!(low > 1e-19 && low < 1e-17, "{low}");
        // Rate above capacity: formula value above one half, still a probability.
        let above = eps(0.01, 57, 256);
        assert!(above > 0.5 && above <= 1.0);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            fbl_error_prob(FblQuery::new(0.0, 57, 256)),
            Err(PhyError::NonPositiveSnr(0.0))
        );
        assert!(fbl_error_prob(FblQuery::new(-1.0, 57, 256)).is_err());
        assert!(fbl_error_prob(FblQuery::new(f64::NAN, 57, 256)).is_err());
        assert!(fbl_error_prob(FblQuery::new(1.0, 0, 256)).is_err());
    }

    #[test]
    fn strictly_decreasing_in_snr_on_grid() {
        // Log-spaced grid through the transition region of m = 200, H = 256.
        let values: Vec<f64> = (0..120)
            .map(|k| 0.7 * (6.0f64 / 0.7).powf(k as f64 / 119.0))
            .map(|g| eps(g, 200, 256))
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn decreasing_in_blocklength_below_capacity_rate() {
        let g = 3.0;
        let mut prev = f64::INFINITY;
        for m in 130..600 {
            let e = eps(g, m, 256);
            assert!(e <= prev);
            prev = e;
        }
    }
}
