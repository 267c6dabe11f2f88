use super::{Result, TxError};

/// Period of the PRBS-15 maximal-length sequence.
pub const PRBS15_PERIOD: usize = (1 << 15) - 1;

/// PRBS-15 bits from the Fibonacci LFSR with polynomial x^15 + x^14 + 1.
///
/// The register holds 15 bits; each step emits `r14 ^ r13` and shifts it in
/// at the bottom. `seed` is the initial register content and must be nonzero.
pub fn prbs15(seed: u32, n: usize) -> Result<Vec<u8>> {
    if seed == 0 || seed >= 1 << 15 {
        return Err(TxError::BadSeed(seed));
    }
    let mut state = seed;
    Ok((0..n)
        .map(|_| {
            let bit = ((state >> 14) ^ (state >> 13)) & 1;
            state = ((state << 1) | bit) & 0x7fff;
            bit as u8
        })
        .collect())
}
