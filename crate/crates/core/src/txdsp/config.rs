use serde::{Deserialize, Serialize};

use super::{Result, TxError};

/// Transmitter settings. Defaults follow the AWG used in the experiments
/// (92 GSa/s, 32 GHz analog bandwidth, 8 bit, 700 mVpp drive) with a 0.15
/// roll-off raised-cosine pulse and a 26 GHz pre-equalizer cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxConfig {
    /// Symbol rate, baud.
    pub baud: f64,
    pub rolloff: f64,
    /// Samples per symbol used by [`super::pulse_shape`].
    pub sps: usize,
    /// Highest frequency the pre-equalizer inverts, Hz.
    pub preeq_cutoff: f64,
    pub dac_bits: u32,
    pub dac_rate: f64,
    pub dac_bandwidth: f64,
    /// Peak-to-peak drive amplitude at DAC full scale, volts.
    pub drive_vpp: f64,
}

impl Default for TxConfig {
    fn default() -> Self {
        Self {
            baud: 50e9,
            rolloff: 0.15,
            sps: 4,
            preeq_cutoff: 26e9,
            dac_bits: 8,
            dac_rate: 92e9,
            dac_bandwidth: 32e9,
            drive_vpp: 0.700,
        }
    }
}

impl TxConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TxError::BadConfig(m));
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(TxError::BadRolloff(self.rolloff));
        }
        if !(self.baud > 0.0) {
            return bad(format!("baud must be positive, got {}", self.baud));
        }
        if self.baud * (1.0 + self.rolloff) / 2.0 >= self.dac_rate / 2.0 {
            return bad(format!(
                "signal band {:.3e} Hz does not fit below the DAC Nyquist {:.3e} Hz",
                self.baud * (1.0 + self.rolloff) / 2.0,
                self.dac_rate / 2.0
            ));
        }
        if self.dac_bits < 1 {
            return bad("dac_bits must be at least 1".into());
        }
        if !(self.drive_vpp > 0.0) {
            return bad(format!(
                "drive_vpp must be positive, got {}",
                self.drive_vpp
            ));
        }
        if self.sps < 2 {
            return bad(format!("sps must be at least 2, got {}", self.sps));
        }
        if !(self.preeq_cutoff > 0.0 && self.dac_bandwidth > 0.0) {
            return bad("cutoff and DAC bandwidth must be positive".into());
        }
        Ok(())
    }

    /// Full-scale DAC amplitude, volts.
    pub fn full_scale(&self) -> f64 {
        self.drive_vpp / 2.0
    }
}
