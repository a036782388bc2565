//! 5G NR resource geometry and transmission timing.
//!
//! All durations are double-precision milliseconds.

use std::fmt;

use crate::error::PhyError;
use crate::phy::mcs::McsEntry;

/// Base subcarrier spacing at numerology 0.
pub const BASE_SPACING_HZ: f64 = 15_000.0;

/// OFDM symbols in a full slot.
pub const SYMBOLS_PER_SLOT: u32 = 14;

/// Scalable numerology index; subcarrier spacing is `2^mu * 15 kHz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Numerology(u8);

impl Numerology {
    pub const ALL: [Numerology; 5] = [
        Numerology(0),
        Numerology(1),
        Numerology(2),
        Numerology(3),
        Numerology(4),
    ];

    pub fn new(mu: u8) -> Result<Self, PhyError> {
        if mu <= 4 {
            Ok(Numerology(mu))
        } else {
            Err(PhyError::InvalidNumerology(mu))
        }
    }

    pub fn mu(self) -> u8 {
        self.0
    }

    /// `2^mu`
    pub fn scale(self) -> u32 {
        1 << self.0
    }

    pub fn subcarrier_spacing_hz(self) -> f64 {
        f64::from(self.scale()) * BASE_SPACING_HZ
    }
}

/// OFDM symbols per mini-slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MiniSlot(u8);

impl MiniSlot {
    pub const ALL: [MiniSlot; 4] = [MiniSlot(2), MiniSlot(4), MiniSlot(7), MiniSlot(14)];

    pub fn new(n_sym: u8) -> Result<Self, PhyError> {
        match n_sym {
            2 | 4 | 7 | 14 => Ok(MiniSlot(n_sym)),
            other => Err(PhyError::InvalidMiniSlot(other)),
        }
    }

    pub fn symbols(self) -> u32 {
        u32::from(self.0)
    }
}

/// One resource configuration: numerology, mini-slot size and MCS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResourceAction {
    pub numerology: Numerology,
    pub mini_slot: MiniSlot,
    pub mcs: McsEntry,
}

impl ResourceAction {
    pub fn new(mu: u8, n_sym: u8, mcs_index: u8) -> Result<Self, PhyError> {
        Ok(ResourceAction {
            numerology: Numerology::new(mu)?,
            mini_slot: MiniSlot::new(n_sym)?,
            mcs: McsEntry::lookup(mcs_index)?,
        })
    }

    /// `(mu, n_sym, mcs_index)`
    pub fn triple(&self) -> (u8, u8, u8) {
        (self.numerology.mu(), self.mini_slot.0, self.mcs.index)
    }

    /// Channel uses needed for `payload_bits` under this action's MCS.
    pub fn blocklength(&self, payload_bits: u32) -> u32 {
        symbols_needed(payload_bits, &self.mcs)
    }

    pub fn tti_ms(&self, payload_bits: u32, bandwidth_hz: f64) -> Result<f64, PhyError> {
        tti_ms(self, payload_bits, bandwidth_hz)
    }
}

impl fmt::Display for ResourceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mu, n, m) = self.triple();
        write!(f, "(mu={mu}, n_sym={n}, mcs={m})")
    }
}

/// `floor(W / (2^mu * 15 kHz))`. Zero means the numerology cannot be used.
pub fn subcarrier_count(mu: Numerology, bandwidth_hz: f64) -> u32 {
    if !(bandwidth_hz > 0.0) {
        return 0;
    }
    (bandwidth_hz / mu.subcarrier_spacing_hz()).floor() as u32
}

/// `n_sym / (14 * 2^mu)` ms.
pub fn subframe_duration_ms(mu: Numerology, n_sym: MiniSlot) -> f64 {
    f64::from(n_sym.symbols()) / f64::from(SYMBOLS_PER_SLOT * mu.scale())
}

/// `ceil(H / (R_c * M))`, evaluated exactly in integers.
pub fn symbols_needed(payload_bits: u32, mcs: &McsEntry) -> u32 {
    let num = u64::from(payload_bits) * 1024;
    let den = u64::from(mcs.rate_x1024) * u64::from(mcs.mod_order);
    num.div_ceil(den) as u32
}

/// `ceil(m / (N_sc * N_sym))`
pub fn subframes_needed(symbols: u32, n_sc: u32, n_sym: MiniSlot) -> u32 {
    symbols.div_ceil(n_sc * n_sym.symbols())
}

/// Transmission time interval of one attempt.
pub fn tti_ms(action: &ResourceAction, payload_bits: u32, bandwidth_hz: f64) -> Result<f64, PhyError> {
    let n_sc = subcarrier_count(action.numerology, bandwidth_hz);
    if n_sc == 0 {
        return Err(PhyError::InfeasibleNumerology {
            mu: action.numerology.mu(),
            bandwidth_hz,
        });
    }
    let m = symbols_needed(payload_bits, &action.mcs);
    let n_sf = subframes_needed(m, n_sc, action.mini_slot);
    Ok(f64::from(n_sf) * subframe_duration_ms(action.numerology, action.mini_slot))
}

/// One OFDM symbol at numerology `mu`: the cost of an ARQ/ACK message.
pub fn arq_duration_ms(mu: Numerology) -> f64 {
    1.0 / f64::from(SYMBOLS_PER_SLOT * mu.scale())
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: f64 = 480_000.0;

    fn mu(m: u8) -> Numerology {
        Numerology::new(m).unwrap()
    }

    fn ms(n: u8) -> MiniSlot {
        MiniSlot::new(n).unwrap()
    }

    #[test]
    fn subcarriers() {
        assert_eq!(subcarrier_count(mu(0), W), 32);
        assert_eq!(subcarrier_count(mu(4), W), 2);
        assert_eq!(subcarrier_count(mu(0), 14_000.0), 0);
        assert_eq!(subcarrier_count(mu(4), 100_000.0), 0);
        assert_eq!(subcarrier_count(mu(0), -1.0), 0);
    }

    #[test]
    fn subframe_durations() {
        assert_eq!(subframe_duration_ms(mu(0), ms(14)), 1.0);
        assert!((subframe_duration_ms(mu(2), ms(2)) - 1.0 / 28.0).abs() < 1e-15);
        assert_eq!(subframe_duration_ms(mu(4), ms(14)), 0.0625);
    }

    #[test]
    fn symbol_counts() {
        assert_eq!(symbols_needed(256, &McsEntry::lookup(15).unwrap()), 57);
        assert_eq!(symbols_needed(256, &McsEntry::lookup(1).unwrap()), 4370);
        assert_eq!(symbols_needed(1, &McsEntry::lookup(8).unwrap()), 1);
        assert_eq!(subframes_needed(57, 32, ms(2)), 1);
        assert_eq!(subframes_needed(4370, 32, ms(2)), 69);
        assert_eq!(subframes_needed(64, 32, ms(2)), 1);
    }

    #[test]
    fn tti_examples() {
        let a = ResourceAction::new(0, 2, 15).unwrap();
        assert!((tti_ms(&a, 256, W).unwrap() - 2.0 / 14.0).abs() < 1e-12);
        let a = ResourceAction::new(0, 2, 1).unwrap();
        assert!((tti_ms(&a, 256, W).unwrap() - 69.0 * 2.0 / 14.0).abs() < 1e-12);
        let a = ResourceAction::new(4, 14, 15).unwrap();
        assert!((tti_ms(&a, 256, W).unwrap() - 0.1875).abs() < 1e-12);
        let a = ResourceAction::new(4, 2, 15).unwrap();
        assert!(matches!(
            tti_ms(&a, 256, 100_000.0),
            Err(PhyError::InfeasibleNumerology { mu: 4, .. })
        ));
    }

    #[test]
    fn arq_examples() {
        assert!((arq_duration_ms(mu(0)) - 1.0 / 14.0).abs() < 1e-15);
        assert!((arq_duration_ms(mu(4)) - 1.0 / 224.0).abs() < 1e-15);
        assert!((arq_duration_ms(mu(1)) - 1.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn constructors_validate() {
        assert_eq!(Numerology::new(5), Err(PhyError::InvalidNumerology(5)));
        assert_eq!(MiniSlot::new(3), Err(PhyError::InvalidMiniSlot(3)));
        assert_eq!(ResourceAction::new(1, 7, 9).unwrap().triple(), (1, 7, 9));
    }

    #[test]
    fn resources_cover_payload() {
        // n_sf * n_sc * n_sym * R_c * M >= H for every action and payload.
        for payload in [1u32, 32, 255, 256, 1000] {
            for mu in Numerology::ALL {
                for n in MiniSlot::ALL {
                    for mcs in crate::phy::MCS_TABLE {
                        let n_sc = subcarrier_count(mu, W);
                        let m = symbols_needed(payload, &mcs);
                        let n_sf = subframes_needed(m, n_sc, n);
                        let capacity_bits = f64::from(n_sf * n_sc * n.symbols()) * mcs.spectral_efficiency();
                        assert!(capacity_bits + 1e-9 >= f64::from(payload));
                    }
                }
            }
        }
    }

    #[test]
    fn tti_non_increasing_in_spectral_efficiency() {
        let mut by_eff = crate::phy::MCS_TABLE.to_vec();
        by_eff.sort_by(|a, b| a.spectral_efficiency().total_cmp(&b.spectral_efficiency()));
        for mu in Numerology::ALL {
            for n in MiniSlot::ALL {
                let ttis: Vec<f64> = by_eff
                    .iter()
                    .map(|mcs| {
                        tti_ms(&ResourceAction { numerology: mu, mini_slot: n, mcs: *mcs }, 256, W).unwrap()
                    })
                    .collect();
                assert!(ttis.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{mu:?} {n:?} {ttis:?}");
            }
        }
    }
}
