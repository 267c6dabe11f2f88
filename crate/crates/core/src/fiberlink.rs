//! Seven-core fiber channel: per-core dispersion, loss and ripple, lumped
//! inter-core crosstalk, and the closed-form chirp/dispersion null predictor.
//!
//! Baseband convention: positive frequencies lie above the optical carrier and
//! the inverse transform synthesizes `exp(+j 2 pi f t)`. Positive dispersion
//! (longer wavelengths arrive later) then acts as `H(f) = exp(+j theta(f))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sigkit::{Filterable, FrequencyResponse, OpticalField, SigError};
use crate::{seed, SPEED_OF_LIGHT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("core index {idx} out of range for a {n_cores}-core fiber")]
    BadCore { idx: usize, n_cores: usize },
    #[error("dispersion must be positive, got {0} ps/nm")]
    NonPositiveDispersion(f64),
    #[error("invalid fiber parameters: {0}")]
    BadParams(String),
    #[error("expected one field per core ({expected}), got {got}")]
    CoreCount { expected: usize, got: usize },
    #[error("core fields are not on a common grid")]
    GridMismatch,
    #[error(transparent)]
    Signal(#[from] SigError),
}

pub type Result<T> = std::result::Result<T, FiberError>;

/// Low-order per-core response ripple, in dB on the detected response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RippleSpec {
    /// Largest excursion from 0 dB.
    pub max_db: f64,
    /// Number of cosine terms.
    pub terms: usize,
    /// Frequency span the cosines are laid over; the ripple is held constant
    /// beyond it.
    pub span: f64,
    pub seed: u64,
}

impl Default for RippleSpec {
    fn default() -> Self {
        Self {
            max_db: 0.75,
            terms: 2,
            span: 35e9,
            seed: 0x5eed_c0de,
        }
    }
}

impl RippleSpec {
    pub fn none() -> Self {
        Self {
            max_db: 0.0,
            ..Self::default()
        }
    }

    /// Ripple in dB for core `core` at frequency offset `f`. Zero at DC and
    /// bounded by `max_db` everywhere.
    pub fn ripple_db(&self, core: usize, f: f64) -> f64 {
        if self.max_db == 0.0 || self.terms == 0 {
            return 0.0;
        }
        let mut rng = seed::rng(seed::derive(self.seed, &[core as u64]));
        let x = f.abs().min(self.span) / self.span;
        let amp = self.max_db / (2.0 * self.terms as f64);
        (1..=self.terms)
            .map(|m| {
                let a = amp * rng.random_range(-1.0..=1.0);
                let ph = rng.random_range(0.0..2.0 * PI);
                a * ((PI * m as f64 * x + ph).cos() - ph.cos())
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McfParams {
    pub n_cores: usize,
    /// ps/(nm km).
    pub dispersion: f64,
    /// Meters.
    pub length: f64,
    /// dB/km.
    pub attenuation: f64,
    /// Coupling between adjacent cores per 100 km, dB.
    pub xt_per_100km: f64,
    /// Insertion loss of one fan-in or fan-out module, dB.
    pub fanio_loss: f64,
    /// Number of fan modules in the link (0 for back-to-back).
    pub fan_modules: u32,
    /// Leakage between adjacent cores in the fan modules, dB.
    pub fanio_xt: f64,
    pub core_variation: RippleSpec,
    /// Lumped dispersion compensation, ps/nm.
    pub dcm_dispersion: f64,
}

impl Default for McfParams {
    fn default() -> Self {
        Self {
            n_cores: 7,
            dispersion: 17.1,
            length: 1000.0,
            attenuation: 0.2,
            xt_per_100km: -45.0,
            fanio_loss: 1.5,
            fan_modules: 2,
            fanio_xt: -50.0,
            core_variation: RippleSpec::default(),
            dcm_dispersion: 0.0,
        }
    }
}

impl McfParams {
    /// Direct connection: no fiber, no fan modules, no ripple, no coupling.
    pub fn back_to_back() -> Self {
        Self {
            length: 0.0,
            fan_modules: 0,
            core_variation: RippleSpec::none(),
            xt_per_100km: f64::NEG_INFINITY,
            fanio_xt: f64::NEG_INFINITY,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(FiberError::BadParams(m.into()));
        if self.n_cores == 0 {
            return bad("n_cores must be at least 1");
        }
        if !(self.dispersion > 0.0) {
            return bad("dispersion must be positive");
        }
        if !(self.length >= 0.0) || !(self.attenuation >= 0.0) || !(self.fanio_loss >= 0.0) {
            return bad("length and losses must be non-negative");
        }
        if !(self.xt_per_100km < 0.0) || !(self.fanio_xt < 0.0) {
            return bad("crosstalk levels must be below 0 dB");
        }
        if !self.dcm_dispersion.is_finite() {
            return bad("dcm_dispersion must be finite");
        }
        if !(self.core_variation.max_db >= 0.0) || !(self.core_variation.span > 0.0) {
            return bad("ripple needs max_db >= 0 and a positive span");
        }
        Ok(())
    }

    /// Accumulated dispersion of fiber plus compensation, ps/nm.
    pub fn total_dispersion(&self) -> f64 {
        self.dispersion * self.length / 1000.0 + self.dcm_dispersion
    }

    /// Field power coupling between one pair of adjacent cores.
    pub fn coupling_power(&self) -> f64 {
        10f64.powf(self.xt_per_100km / 10.0) * (self.length / 100e3)
            + 10f64.powf(self.fanio_xt / 10.0)
    }

    /// Indices of the cores adjacent to `core` in a hexagonal layout: core 0 is
    /// the center and the rest form a ring around it.
    pub fn neighbors(&self, core: usize) -> Vec<usize> {
        let n = self.n_cores;
        if n < 2 || core >= n {
            return Vec::new();
        }
        if core == 0 {
            return (1..n).collect();
        }
        let ring = n - 1;
        let mut out = vec![0];
        if ring >= 2 {
            let pos = core - 1;
            let next = 1 + (pos + 1) % ring;
            let prev = 1 + (pos + ring - 1) % ring;
            out.push(prev);
            if next != prev {
                out.push(next);
            }
        }
        out
    }
}

/// ps/nm to s/m.
fn ps_per_nm_to_si(d: f64) -> f64 {
    d * 1e-12 / 1e-9
}

/// Dispersion phase `theta(f) = pi lambda^2 D f^2 / c` for accumulated
/// dispersion `d_total` in ps/nm.
pub fn dispersion_phase(d_total: f64, wavelength: f64, f: f64) -> f64 {
    PI * wavelength * wavelength * ps_per_nm_to_si(d_total) * f * f / SPEED_OF_LIGHT
}

/// All-pass dispersion operator on `freqs`.
pub fn dispersion_response(
    d_total: f64,
    wavelength: f64,
    freqs: Vec<f64>,
) -> Result<FrequencyResponse> {
    Ok(FrequencyResponse::from_fn(freqs, |f| {
        Complex64::from_polar(1.0, dispersion_phase(d_total, wavelength, f))
    })?)
}

/// Applies accumulated dispersion `d_total` (ps/nm) to a field.
pub fn disperse(field: &OpticalField, d_total: f64) -> OpticalField {
    if d_total == 0.0 {
        return field.clone();
    }
    let lambda = field.wavelength();
    field.filtered_by(|f| Complex64::from_polar(1.0, dispersion_phase(d_total, lambda, f)))
}

/// First null of the small-signal response of a transiently chirped source
/// after dispersion, where `tan theta = 1 / alpha_h`.
pub fn predict_notch(alpha_h: f64, d_total: f64, wavelength: f64) -> Result<f64> {
    if !(d_total > 0.0) {
        return Err(FiberError::NonPositiveDispersion(d_total));
    }
    let theta = if alpha_h == 0.0 {
        PI / 2.0
    } else {
        (1.0 / alpha_h).atan()
    };
    Ok((theta * SPEED_OF_LIGHT / (PI * wavelength * wavelength * ps_per_nm_to_si(d_total))).sqrt())
}

/// Propagates one core: fan-in loss, per-core ripple, dispersion, fiber
/// attenuation and fan-out loss.
pub fn propagate_core(
    field: &OpticalField,
    params: &McfParams,
    core_idx: usize,
) -> Result<OpticalField> {
    params.validate()?;
    if core_idx >= params.n_cores {
        return Err(FiberError::BadCore {
            idx: core_idx,
            n_cores: params.n_cores,
        });
    }
    let ripple = &params.core_variation;
    let mut out = if ripple.max_db > 0.0 {
        field.filtered_by(|f| Complex64::new(10f64.powf(ripple.ripple_db(core_idx, f) / 20.0), 0.0))
    } else {
        field.clone()
    };
    out = disperse(&out, params.total_dispersion());
    let loss_db =
        params.attenuation * params.length / 1000.0 + params.fanio_loss * params.fan_modules as f64;
    if loss_db != 0.0 {
        out = out.scaled(10f64.powf(-loss_db / 20.0));
    }
    Ok(out)
}

/// Lumped weak coupling between adjacent cores at the fiber end.
///
/// Each adjacent pair couples with field amplitude `sqrt(coupling_power)` and a
/// random phase drawn from `seed`. The coupling matrix is unitary to first
/// order, so total power is conserved up to terms of order `coupling_power`.
pub fn add_crosstalk(
    fields: &[OpticalField],
    params: &McfParams,
    seed: u64,
) -> Result<Vec<OpticalField>> {
    params.validate()?;
    if fields.len() != params.n_cores {
        return Err(FiberError::CoreCount {
            expected: params.n_cores,
            got: fields.len(),
        });
    }
    if fields.iter().any(|f| !f.same_grid(&fields[0])) {
        return Err(FiberError::GridMismatch);
    }
    let kp = params.coupling_power();
    if kp == 0.0 {
        return Ok(fields.to_vec());
    }
    let k = kp.sqrt();
    let phase = |a: usize, b: usize| {
        let (lo, hi) = (a.min(b), a.max(b));
        let mut rng = seed::rng(seed::derive(seed, &[lo as u64, hi as u64]));
        rng.random_range(0.0..2.0 * PI)
    };
    let out = (0..params.n_cores)
        .map(|c| {
            let nb = params.neighbors(c);
            let through = (1.0 - nb.len() as f64 * kp).max(0.0).sqrt();
            let mut acc: Vec<Complex64> = fields[c].samples().iter().map(|s| s * through).collect();
            for &j in &nb {
                // Anti-Hermitian off-diagonal: c couples from j with +k e^{j phi},
                // j from c with -k e^{-j phi}.
                let coef = if c < j {
                    Complex64::from_polar(k, phase(c, j))
                } else {
                    -Complex64::from_polar(k, -phase(c, j))
                };
                for (a, s) in acc.iter_mut().zip(fields[j].samples()) {
                    *a += coef * s;
                }
            }
            fields[c].with_samples(acc)
        })
        .collect();
    Ok(out)
}
