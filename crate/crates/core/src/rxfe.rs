//! Receiver front end: AGC pre-amplifier with ASE and optical band-pass
//! filter, attenuator, square-law photodiode, and band-limited quantizing ADC.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sigkit::{filters, resample, Filterable, OpticalField, SigError, Waveform};
use crate::txdsp::quantize;
use crate::{seed, ELEMENTARY_CHARGE, PLANCK, SPEED_OF_LIGHT};

/// Lowest amplifier input power accepted, dBm.
pub const EDFA_SENSITIVITY_DBM: f64 = -40.0;

/// Optical bandwidth OSNR is quoted in: 0.1 nm at 1550 nm.
pub const OSNR_REF_NM: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RxError {
    #[error("amplifier input {0:.2} dBm below the {EDFA_SENSITIVITY_DBM} dBm floor")]
    BelowSensitivity(f64),
    #[error("attenuator cannot raise power: target {target:.3} dBm above input {current:.3} dBm")]
    AboveInput { target: f64, current: f64 },
    #[error("field sampled at {rate:.3e} Sa/s cannot carry a {bandwidth:.3e} Hz photodiode")]
    GridTooCoarse { rate: f64, bandwidth: f64 },
    #[error("invalid receiver parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Signal(#[from] SigError),
}

pub type Result<T> = std::result::Result<T, RxError>;

/// Independent switches for each receiver noise source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxNoise {
    pub ase: bool,
    pub thermal: bool,
    pub shot: bool,
}

impl Default for RxNoise {
    fn default() -> Self {
        Self {
            ase: true,
            thermal: true,
            shot: true,
        }
    }
}

impl RxNoise {
    pub fn off() -> Self {
        Self {
            ase: false,
            thermal: false,
            shot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxParams {
    /// Amplifier output power held by the gain control, dBm.
    pub edfa_pout: f64,
    /// Amplifier noise figure, dB.
    pub edfa_nf: f64,
    /// Full width of the ASE-suppression filter, Hz.
    pub obpf_bw: f64,
    /// A/W.
    pub pd_responsivity: f64,
    pub pd_bandwidth: f64,
    /// One-sided thermal current noise density, A^2/Hz. The default puts the
    /// 7%-overhead FEC crossing of the 70 Gbaud back-to-back link at 0 dBm.
    pub thermal_noise_psd: f64,
    pub adc_rate: f64,
    pub adc_bandwidth: f64,
    pub adc_bits: u32,
    pub noise: RxNoise,
}

impl Default for RxParams {
    fn default() -> Self {
        Self {
            edfa_pout: 7.0,
            edfa_nf: 5.0,
            obpf_bw: 100e9,
            pd_responsivity: 0.5,
            pd_bandwidth: 90e9,
            thermal_noise_psd: 1.3e-21,
            adc_rate: 160e9,
            adc_bandwidth: 63e9,
            adc_bits: 8,
            noise: RxNoise::default(),
        }
    }
}

/// Order of the zero-phase ADC anti-alias response.
pub const ADC_FILTER_ORDER: u32 = 12;
/// Order of the photodiode roll-off.
pub const PD_FILTER_ORDER: u32 = 2;
/// Super-Gaussian order of the optical band-pass filter.
pub const OBPF_ORDER: u32 = 2;

impl RxParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(RxError::BadParams(m.into()));
        if !(self.obpf_bw > 0.0
            && self.pd_bandwidth > 0.0
            && self.adc_rate > 0.0
            && self.adc_bandwidth > 0.0)
        {
            return bad("bandwidths and rates must be positive");
        }
        if !(self.pd_responsivity > 0.0 && self.pd_responsivity <= 1.2) {
            return bad("responsivity must lie in (0, 1.2] A/W");
        }
        if !(self.thermal_noise_psd >= 0.0)
            || !self.edfa_nf.is_finite()
            || !self.edfa_pout.is_finite()
        {
            return bad("noise parameters must be finite and non-negative");
        }
        if self.adc_bits == 0 || self.adc_bits > 24 {
            return bad("adc_bits must be in 1..=24");
        }
        Ok(())
    }
}

fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// ASE spectral density per polarization at the amplifier output, W/Hz.
pub fn ase_psd(gain: f64, nf_db: f64, wavelength: f64) -> f64 {
    let nu = SPEED_OF_LIGHT / wavelength;
    ((10f64.powf(nf_db / 10.0) * gain / 2.0 - 1.0) * PLANCK * nu).max(0.0)
}

/// Output OSNR in the 0.1 nm reference band for a given amplifier input
/// power (W). Lower input needs more gain, so OSNR falls with input power.
pub fn edfa_osnr_db(p_in: f64, params: &RxParams, wavelength: f64) -> f64 {
    let pout = dbm_to_w(params.edfa_pout);
    let gain = pout / p_in;
    let b_ref = SPEED_OF_LIGHT * OSNR_REF_NM * 1e-9 / (wavelength * wavelength);
    10.0 * (pout / (ase_psd(gain, params.edfa_nf, wavelength) * b_ref)).log10()
}

/// Gain-controlled amplifier: adds ASE for the gain needed to reach
/// `edfa_pout`, band-pass filters, then holds total output at `edfa_pout`.
pub fn edfa_agc(field: &OpticalField, params: &RxParams, rng_seed: u64) -> Result<OpticalField> {
    params.validate()?;
    let p_in = field.mean_power();
    let p_in_dbm = w_to_dbm(p_in);
    if !(p_in_dbm > EDFA_SENSITIVITY_DBM) {
        return Err(RxError::BelowSensitivity(p_in_dbm));
    }
    let pout = dbm_to_w(params.edfa_pout);
    let gain = pout / p_in;
    let mut samples: Vec<Complex64> = field.samples().iter().map(|s| s * gain.sqrt()).collect();
    if params.noise.ase {
        let var = ase_psd(gain, params.edfa_nf, field.wavelength()) * field.sample_rate();
        if var > 0.0 {
            let normal = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
            let mut rng = seed::rng(rng_seed);
            for s in samples.iter_mut() {
                *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
    }
    let bw = params.obpf_bw;
    let filtered = field
        .with_samples(samples)
        .filtered_by(|f| filters::super_gaussian(f, bw, OBPF_ORDER));
    let total = filtered.mean_power();
    Ok(filtered.scaled((pout / total).sqrt()))
}

/// Uniform attenuation to `target_rop` dBm.
pub fn voa_set_rop(field: &OpticalField, target_rop: f64) -> Result<OpticalField> {
    let current = w_to_dbm(field.mean_power());
    if target_rop > current + 1e-9 {
        return Err(RxError::AboveInput {
            target: target_rop,
            current,
        });
    }
    Ok(field.scaled(10f64.powf((target_rop - current) / 20.0)))
}

/// Square-law detection with thermal and shot noise, then the photodiode
/// roll-off.
pub fn photodetect(field: &OpticalField, params: &RxParams, rng_seed: u64) -> Result<Waveform> {
    params.validate()?;
    let fs = field.sample_rate();
    if fs < 2.0 * params.pd_bandwidth {
        return Err(RxError::GridTooCoarse {
            rate: fs,
            bandwidth: params.pd_bandwidth,
        });
    }
    let r = params.pd_responsivity;
    let mut i: Vec<f64> = field.samples().iter().map(|s| r * s.norm_sqr()).collect();
    let mean = i.iter().sum::<f64>() / i.len() as f64;
    let mut var = 0.0;
    if params.noise.thermal {
        var += params.thermal_noise_psd * fs / 2.0;
    }
    if params.noise.shot {
        var += ELEMENTARY_CHARGE * mean.max(0.0) * fs;
    }
    if var > 0.0 {
        let normal = Normal::new(0.0, var.sqrt()).expect("finite variance");
        let mut rng = seed::rng(rng_seed);
        for v in i.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    let bw = params.pd_bandwidth;
    Ok(Waveform::new(i, fs)?.filtered_by(|f| filters::butterworth_mag(f, bw, PD_FILTER_ORDER)))
}

/// Anti-alias filter, resampling to `adc_rate`, and quantization. Vertical
/// offset and range are set so the quantizer spans the captured minimum to
/// maximum, as when a scope trace is scaled to fill the screen.
pub fn adc_capture(i: &Waveform, params: &RxParams) -> Result<Waveform> {
    params.validate()?;
    let bw = params.adc_bandwidth;
    let filtered = i.filtered_by(|f| filters::butterworth_mag(f, bw, ADC_FILTER_ORDER));
    let sampled = resample(&filtered, params.adc_rate)?;
    let s = sampled.samples();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mid, fs) = (0.5 * (hi + lo), 0.5 * (hi - lo));
    if fs == 0.0 {
        return Ok(sampled);
    }
    let bits = params.adc_bits;
    Ok(sampled.map(|x| mid + quantize(x - mid, bits, fs)))
}
