//! Offline receiver DSP: timing and frame synchronization, adaptive FFE/DFE,
//! PAM-4 decisions, BER counting against the PRBS, FEC verdicts and eye
//! diagrams.

mod ber;
mod config;
mod equalizer;
mod eye;
mod sync;

use thiserror::Error;

use crate::sigkit::SigError;

pub use ber::{count_ber, fec_verdict, BerCount, BerRecord, FEC_7PCT_LIMIT, FEC_KP4_LIMIT};
pub use config::{EqConfig, EqMode, Spacing};
pub use equalizer::{decide, decide_and_demap, equalize, normalize_affine, Equalized};
pub use eye::{eye_diagram, EyeDiagram};
pub use sync::{synchronize, Synced, SYNC_SPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RxDspError {
    #[error("correlation peak {peak:.4} below the significance threshold {threshold:.4}")]
    SyncFailure { peak: f64, threshold: f64 },
    #[error("capture spans {got:.3} symbols, expected a whole number of {period}-symbol periods")]
    CaptureLength { got: f64, period: usize },
    #[error("equalizer diverged with step {mu}: error energy grew {growth:.1}x during training")]
    Diverged { mu: f64, growth: f64 },
    #[error("best alignment still has {error_fraction:.3} bit errors")]
    Unalignable { error_fraction: f64 },
    #[error("eye diagram needs at least 4 samples per symbol, got {0:.2}")]
    TooFewSamples(f64),
    #[error("invalid equalizer configuration: {0}")]
    BadConfig(String),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Signal(#[from] SigError),
}

pub type Result<T> = std::result::Result<T, RxDspError>;
