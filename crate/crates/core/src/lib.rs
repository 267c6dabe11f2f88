//! Signal, device and DSP models for PAM-4 intensity-modulation / direct-detection
//! links built from a chirped directly modulated VCSEL and a 7-core multicore fiber.
//!
//! The crate is organized along the physical chain:
//!
//! ```text
//! txdsp ──► vcsel ──► fiberlink ──► rxfe ──► rxdsp
//!   PRBS-15, PAM-4,     L-I-V, S21,    dispersion,     EDFA, VOA,     sync, FFE/DFE,
//!   RC shaping, pre-EQ,  chirp          DCM, crosstalk  PD, ADC        BER, eye
//!   DAC
//! ```
//!
//! Every stage works on the immutable signal types in [`sigkit`]. All captures are
//! treated as one period of a periodic signal, so every linear filter is a circular
//! convolution evaluated in the frequency domain.

pub mod fiberlink;
pub mod rxdsp;
pub mod rxfe;
pub mod seed;
pub mod sigkit;
pub mod txdsp;
pub mod vcsel;

pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
