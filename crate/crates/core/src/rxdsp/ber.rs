use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EqConfig, Result, RxDspError};
use crate::sigkit::{fft_forward, fft_inverse};

/// Pre-FEC limit of the 7 % overhead hard-decision code.
pub const FEC_7PCT_LIMIT: f64 = 3.8e-3;
/// Pre-FEC limit of the KP4 code.
pub const FEC_KP4_LIMIT: f64 = 2.4e-4;

/// Alignments leaving this fraction of errors or more are rejected.
const UNALIGNABLE_FRACTION: f64 = 0.4;

/// (7 % HD-FEC pass, KP4 pass).
pub fn fec_verdict(ber: f64) -> (bool, bool) {
    (ber <= FEC_7PCT_LIMIT, ber <= FEC_KP4_LIMIT)
}

/// Error count of one comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BerCount {
    pub bits: u64,
    pub errors: u64,
    /// Reference index matched to the first decided bit.
    pub shift: usize,
}

impl BerCount {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    pub fn merged(&self, other: &BerCount) -> BerCount {
        BerCount {
            bits: self.bits + other.bits,
            errors: self.errors + other.errors,
            shift: self.shift,
        }
    }
}

/// Counts bit errors of `bits` against a cyclic `reference` (for example one
/// PRBS period) at the best cyclic alignment.
///
/// The decided bits are folded modulo the reference period and
/// cross-correlated with it, so every bit shift (and with it the two-bit
/// symbol ambiguity) is searched in one transform.
pub fn count_ber(bits: &[u8], reference: &[u8]) -> Result<BerCount> {
    let p = reference.len();
    if p == 0 || bits.is_empty() {
        return Err(RxDspError::BadInput("empty bit sequence".into()));
    }
    let pm = |b: u8| if b & 1 == 1 { 1.0 } else { -1.0 };
    let mut folded = vec![Complex64::new(0.0, 0.0); p];
    for (i, &b) in bits.iter().enumerate() {
        folded[i % p].re += pm(b);
    }
    let mut r: Vec<Complex64> = reference
        .iter()
        .map(|&b| Complex64::new(pm(b), 0.0))
        .collect();
    fft_forward(&mut folded);
    fft_forward(&mut r);
    // c[s] = sum_j f[j] r[j + s]
    for (a, b) in folded.iter_mut().zip(&r) {
        *a = a.conj() * b;
    }
    fft_inverse(&mut folded);
    let shift = folded
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
        .map(|(s, _)| s)
        .unwrap();
    let errors = bits
        .iter()
        .enumerate()
        .filter(|&(i, &b)| (b & 1) != (reference[(i + shift) % p] & 1))
        .count() as u64;
    let count = BerCount {
        bits: bits.len() as u64,
        errors,
        shift,
    };
    if count.ber() >= UNALIGNABLE_FRACTION {
        return Err(RxDspError::Unalignable {
            error_fraction: count.ber(),
        });
    }
    Ok(count)
}

/// One (core, received power, equalizer) BER result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub core_idx: usize,
    pub rop_dbm: f64,
    pub baud: f64,
    pub eq: EqConfig,
    pub bits_compared: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub fec_7pct_pass: bool,
    pub fec_kp4_pass: bool,
}

impl BerRecord {
    pub fn new(core_idx: usize, rop_dbm: f64, baud: f64, eq: EqConfig, count: BerCount) -> Self {
        let ber = count.ber();
        let (fec_7pct_pass, fec_kp4_pass) = fec_verdict(ber);
        Self {
            core_idx,
            rop_dbm,
            baud,
            eq,
            bits_compared: count.bits,
            bit_errors: count.errors,
            ber,
            fec_7pct_pass,
            fec_kp4_pass,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::txdsp::{prbs15, PRBS15_PERIOD};

    fn prbs_period() -> Vec<u8> {
        prbs15(0x7fff, PRBS15_PERIOD).unwrap()
    }

    #[test]
    fn identical_and_single_error() {
        let r = prbs_period();
        let bits: Vec<u8> = r.iter().chain(&r).copied().collect();
        assert_eq!(count_ber(&bits, &r).unwrap().errors, 0);
        let mut one = bits.clone();
        one[40000] ^= 1;
        let c = count_ber(&one, &r).unwrap();
        assert_eq!((c.errors, c.bits), (1, 65534));
        assert_eq!(c.ber(), 1.0 / 65534.0);
    }

    #[test]
    fn rotation_does_not_change_the_count() {
        let r = prbs_period();
        // Three whole periods stay a contiguous PRBS run under any rotation.
        let mut bits: Vec<u8> = r.iter().cycle().take(3 * PRBS15_PERIOD).copied().collect();
        for i in (0..bits.len()).step_by(997) {
            bits[i] ^= 1;
        }
        let base = count_ber(&bits, &r).unwrap();
        assert_eq!(base.errors, bits.len().div_ceil(997) as u64);
        for rot in [1, 2, 777, 32766, 54321] {
            let mut rb = bits.clone();
            rb.rotate_left(rot);
            let c = count_ber(&rb, &r).unwrap();
            assert_eq!((c.errors, c.bits), (base.errors, base.bits));
            assert_eq!(c.shift, rot % PRBS15_PERIOD);
        }
    }

    #[test]
    fn garbage_is_unalignable() {
        let r = prbs_period();
        let bits: Vec<u8> = (0..50_000).map(|i| ((i * 7919) % 13 % 2) as u8).collect();
        assert!(matches!(
            count_ber(&bits, &r),
            Err(RxDspError::Unalignable { .. })
        ));
    }

    #[test]
    fn fec_thresholds() {
        assert_eq!(fec_verdict(3.7e-3), (true, false));
        assert_eq!(fec_verdict(1.0e-4), (true, true));
        assert_eq!(fec_verdict(1.0e-2), (false, false));
        assert_eq!(fec_verdict(FEC_7PCT_LIMIT), (true, false));
    }
}
