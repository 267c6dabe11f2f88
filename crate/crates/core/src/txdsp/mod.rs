//! Transmitter DSP: PRBS-15 source, Gray PAM-4 mapping, raised-cosine pulse
//! shaping, zero-forcing pre-equalization and the DAC model.

mod config;
mod dac;
mod pam4;
mod prbs;
mod preeq;
mod shaping;

use thiserror::Error;

use crate::sigkit::SigError;

pub use config::TxConfig;
pub use dac::{apply_preeq_and_dac, dac_analog, normalize_to_full_scale, quantize};
pub use pam4::{demap_pam4, map_pam4, PAM4_LEVELS};
pub use prbs::{prbs15, PRBS15_PERIOD};
pub use preeq::{design_preequalizer, REGULARIZATION_FLOOR_DB};
pub use shaping::{pulse_shape, pulse_shape_at_rate, raised_cosine};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TxError {
    #[error("PRBS seed must be a nonzero 15-bit value, got {0:#x}")]
    BadSeed(u32),
    #[error("PAM-4 mapping needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("roll-off {0} outside [0, 1]")]
    BadRolloff(f64),
    #[error("invalid transmitter configuration: {0}")]
    BadConfig(String),
    #[error("channel response is zero everywhere below the cutoff")]
    ChannelZero,
    #[error("output length {0} samples is not an integer for this rate")]
    NonIntegerLength(f64),
    #[error(transparent)]
    Signal(#[from] SigError),
}

pub type Result<T> = std::result::Result<T, TxError>;
