use crate::error::PhyError;

/// One row of the URLLC MCS table: code rate as `rate_x1024 / 1024` and
/// modulation order in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct McsEntry {
    pub index: u8,
    pub rate_x1024: u16,
    pub mod_order: u8,
}

impl McsEntry {
    pub fn code_rate(&self) -> f64 {
        f64::from(self.rate_x1024) / 1024.0
    }

    /// Information bits carried per channel symbol.
    pub fn spectral_efficiency(&self) -> f64 {
        self.code_rate() * f64::from(self.mod_order)
    }

    pub fn lookup(index: u8) -> Result<McsEntry, PhyError> {
        MCS_TABLE
            .get(usize::from(index).wrapping_sub(1))
            .copied()
            .ok_or(PhyError::InvalidMcs(index))
    }
}

const fn entry(index: u8, rate_x1024: u16, mod_order: u8) -> McsEntry {
    McsEntry { index, rate_x1024, mod_order }
}

/// MCS index table for URLLC service (QPSK 1-8, 16QAM 9-11, 64QAM 12-15).
pub const MCS_TABLE: [McsEntry; 15] = [
    entry(1, 30, 2),
    entry(2, 50, 2),
    entry(3, 78, 2),
    entry(4, 120, 2),
    entry(5, 193, 2),
    entry(6, 308, 2),
    entry(7, 449, 2),
    entry(8, 602, 2),
    entry(9, 378, 4),
    entry(10, 490, 4),
    entry(11, 616, 4),
    entry(12, 466, 6),
    entry(13, 567, 6),
    entry(14, 666, 6),
    entry(15, 772, 6),
];
