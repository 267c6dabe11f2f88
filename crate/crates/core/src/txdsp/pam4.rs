use super::{Result, TxError};

/// The four amplitude levels, lowest first.
pub const PAM4_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Gray code (MSB first) of each level in [`PAM4_LEVELS`] order.
const GRAY: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 1), (1, 0)];

/// Maps bit pairs (MSB first) to levels: 00→-3, 01→-1, 11→+1, 10→+3.
pub fn map_pam4(bits: &[u8]) -> Result<Vec<f64>> {
    if bits.len() % 2 != 0 {
        return Err(TxError::OddBitCount(bits.len()));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| match (p[0] & 1, p[1] & 1) {
            (0, 0) => -3.0,
            (0, 1) => -1.0,
            (1, 1) => 1.0,
            _ => 3.0,
        })
        .collect())
}

/// Inverse of [`map_pam4`] for a level index 0..4 (lowest level first).
pub fn demap_pam4(level_index: usize) -> (u8, u8) {
    GRAY[level_index]
}
