//! Experiment orchestration for the PAM-4 multicore-fiber link simulator:
//! channel characterization, BER runs over cores x RoP x equalizer grids,
//! sweeps, and their CSV outputs.

pub mod chain;
pub mod experiments;
pub mod output;
pub mod scenario;

use mcfpam_core::{fiberlink, rxdsp, rxfe, sigkit, txdsp, vcsel};

pub use chain::{characterize_link, characterize_link_with, ProbeOptions};
pub use experiments::{
    compare_equalizers, fec_crossing, notch_report, run_scenario, sweep_rop, sweep_taps, Combo,
    NotchRow, RopTable, RunReport, TapRow, UNALIGNABLE_BER,
};
pub use scenario::{LinkConfig, Scenario, PRESETS};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("scenario: {0}")]
    BadScenario(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("probe clipped the VCSEL on core {core} ({fraction:.2e} of samples)")]
    ProbeClipping { core: usize, fraction: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Signal(#[from] sigkit::SigError),
    #[error(transparent)]
    Tx(#[from] txdsp::TxError),
    #[error(transparent)]
    Vcsel(#[from] vcsel::VcselError),
    #[error(transparent)]
    Fiber(#[from] fiberlink::FiberError),
    #[error(transparent)]
    Rx(#[from] rxfe::RxError),
    #[error(transparent)]
    Dsp(#[from] rxdsp::RxDspError),
}

pub type Result<T> = std::result::Result<T, BenchError>;
