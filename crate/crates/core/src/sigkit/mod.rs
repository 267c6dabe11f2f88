//! Foundation signal types and spectral operations.
//!
//! All captures are one period of a periodic signal. Filtering is therefore a
//! circular convolution: the transform of the input is multiplied by the
//! response evaluated on the transform grid, and transients wrap around the
//! block edges. Tests that care about transients keep a guard interval away
//! from the block edges.

mod fft;
pub mod filters;
pub mod io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fft::{bin_frequency, fft_forward, fft_inverse, spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigError {
    #[error("signal has no samples")]
    Empty,
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("wavelength {0} m outside (1 um, 2 um)")]
    BadWavelength(f64),
    #[error("frequency grid not strictly increasing at index {0}")]
    NonMonotonicGrid(usize),
    #[error("frequency grid has {freqs} points but {gains} gains")]
    LengthMismatch { freqs: usize, gains: usize },
    #[error("response covers [{have_lo:.4e}, {have_hi:.4e}] Hz but [{need_lo:.4e}, {need_hi:.4e}] Hz is required")]
    Coverage {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SigError>;

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(SigError::BadSampleRate(rate))
    }
}

/// A real-valued sampled electrical signal (volts or amperes by context).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if samples.is_empty() {
            return Err(SigError::Empty);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SigError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration of one period of the capture, seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    /// Same sample rate, samples transformed pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().map(|&s| f(s)).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn scaled(&self, g: f64) -> Self {
        self.map(|s| s * g)
    }

    /// Replaces the samples, keeping the rate. Caller guarantees finiteness.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

/// Complex baseband envelope of an optical field, in sqrt(W), around a center
/// wavelength. Instantaneous power is `|sample|^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalField {
    samples: Vec<Complex64>,
    sample_rate: f64,
    wavelength: f64,
}

impl OpticalField {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, wavelength: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if samples.is_empty() {
            return Err(SigError::Empty);
        }
        if !(wavelength > 1e-6 && wavelength < 2e-6) {
            return Err(SigError::BadWavelength(wavelength));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(SigError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
            wavelength,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Instantaneous power |E|^2 in watts.
    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    /// Mean power in watts.
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Total energy in W·sample (sum of |E|^2).
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Field scaled by a real amplitude factor (power scales by `g^2`).
    pub fn scaled(&self, g: f64) -> Self {
        self.with_samples(self.samples.iter().map(|s| s * g).collect())
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), self.samples.len());
        Self {
            samples,
            sample_rate: self.sample_rate,
            wavelength: self.wavelength,
        }
    }

    /// True when both fields share sample rate, length and wavelength.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.samples.len() == other.samples.len()
            && self.sample_rate == other.sample_rate
            && self.wavelength == other.wavelength
    }
}

/// Complex gain over a strictly increasing frequency grid in hertz.
///
/// Between grid points the gain is interpolated linearly in the complex plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyResponse {
    freqs: Vec<f64>,
    gains: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn new(freqs: Vec<f64>, gains: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != gains.len() {
            return Err(SigError::LengthMismatch {
                freqs: freqs.len(),
                gains: gains.len(),
            });
        }
        if freqs.is_empty() {
            return Err(SigError::Empty);
        }
        if let Some(i) = freqs.iter().position(|f| !f.is_finite()) {
            return Err(SigError::NonFinite(i));
        }
        if let Some(i) = freqs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SigError::NonMonotonicGrid(i + 1));
        }
        if let Some(i) = gains
            .iter()
            .position(|g| !(g.re.is_finite() && g.im.is_finite()))
        {
            return Err(SigError::NonFinite(i));
        }
        Ok(Self { freqs, gains })
    }

    /// Evaluates `f` on the given grid.
    pub fn from_fn(freqs: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let gains = freqs.iter().map(|&x| f(x)).collect();
        Self::new(freqs, gains)
    }

    /// Unit gain everywhere on the grid.
    pub fn flat(freqs: Vec<f64>) -> Result<Self> {
        Self::from_fn(freqs, |_| Complex64::new(1.0, 0.0))
    }

    /// `n` points evenly spaced over `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        assert!(n >= 2, "linspace needs at least two points");
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| lo + step * i as f64).collect()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.gains.iter().map(|g| 20.0 * g.norm().log10()).collect()
    }

    /// Linearly interpolated gain, `None` outside the grid.
    pub fn gain_at(&self, f: f64) -> Option<Complex64> {
        let (lo, hi) = (self.freqs[0], *self.freqs.last().unwrap());
        if f < lo || f > hi || self.freqs.len() == 1 && f != lo {
            return None;
        }
        let idx = self.freqs.partition_point(|&x| x <= f);
        if idx == 0 {
            return Some(self.gains[0]);
        }
        let i = idx - 1;
        if self.freqs[i] == f || i + 1 == self.freqs.len() {
            return Some(self.gains[i]);
        }
        let t = (f - self.freqs[i]) / (self.freqs[i + 1] - self.freqs[i]);
        Some(self.gains[i] + (self.gains[i + 1] - self.gains[i]) * t)
    }

    /// Pointwise product with another response on the same grid.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.freqs != other.freqs {
            return Err(SigError::GridMismatch(
                "responses must share a frequency grid".into(),
            ));
        }
        let gains = self
            .gains
            .iter()
            .zip(&other.gains)
            .map(|(a, b)| a * b)
            .collect();
        Self::new(self.freqs.clone(), gains)
    }

    /// Resamples onto another grid by interpolation.
    pub fn resampled(&self, freqs: Vec<f64>) -> Result<Self> {
        let mut gains = Vec::with_capacity(freqs.len());
        for &f in &freqs {
            gains.push(self.gain_at(f).ok_or(SigError::Coverage {
                need_lo: f,
                need_hi: f,
                have_lo: self.freqs[0],
                have_hi: *self.freqs.last().unwrap(),
            })?);
        }
        Self::new(freqs, gains)
    }

    /// First local minimum of `|gain|` lying at least `min_depth_db` below the
    /// gain at the first grid point.
    ///
    /// The location is refined on the two adjacent segments by minimizing the
    /// magnitude of the linearly interpolated complex gain, which finds a
    /// sign-changing zero between grid points exactly when the gain is locally
    /// linear.
    pub fn first_null(&self, min_depth_db: f64) -> Option<Null> {
        let mag: Vec<f64> = self.gains.iter().map(|g| g.norm()).collect();
        let reference = mag[0];
        if reference == 0.0 || mag.len() < 3 {
            return None;
        }
        let limit = reference * 10f64.powf(-min_depth_db.abs() / 20.0);
        let k = (1..mag.len() - 1)
            .find(|&k| mag[k] <= mag[k - 1] && mag[k] <= mag[k + 1] && mag[k] <= limit)?;
        let mut best = (self.freqs[k], mag[k]);
        for (i, j) in [(k - 1, k), (k, k + 1)] {
            let (a, b) = (self.gains[i], self.gains[j]);
            let d = b - a;
            let den = d.norm_sqr();
            if den == 0.0 {
                continue;
            }
            let t = (-(a * d.conj()).re / den).clamp(0.0, 1.0);
            let m = (a + d * t).norm();
            if m < best.1 {
                best = (self.freqs[i] + t * (self.freqs[j] - self.freqs[i]), m);
            }
        }
        Some(Null {
            freq: best.0,
            depth_db: 20.0 * (best.1 / reference).max(1e-300).log10(),
        })
    }

    fn require(&self, need_lo: f64, need_hi: f64) -> Result<()> {
        let (have_lo, have_hi) = (self.freqs[0], *self.freqs.last().unwrap());
        if need_lo < have_lo || need_hi > have_hi {
            return Err(SigError::Coverage {
                need_lo,
                need_hi,
                have_lo,
                have_hi,
            });
        }
        Ok(())
    }
}

/// A response minimum: its frequency and its depth relative to the response at
/// the lowest grid frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Null {
    pub freq: f64,
    pub depth_db: f64,
}

/// A signal that can be filtered by a linear time-invariant response.
pub trait Filterable: Sized {
    /// Applies a transfer function evaluated exactly at every transform bin.
    fn filtered_by(&self, h: impl Fn(f64) -> Complex64) -> Self;

    /// Applies a tabulated response, interpolated onto the transform grid.
    fn filtered(&self, h: &FrequencyResponse) -> Result<Self>;
}

impl Filterable for Waveform {
    fn filtered_by(&self, h: impl Fn(f64) -> Complex64) -> Self {
        let n = self.samples.len();
        let fs = self.sample_rate;
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&s| Complex64::new(s, 0.0))
            .collect();
        fft_forward(&mut buf);
        // Evaluate on non-negative bins and mirror, so the output is exactly real.
        let half = n / 2;
        for k in 0..=half {
            let f = k as f64 * fs / n as f64;
            let mut g = h(f);
            if k == 0 || (n % 2 == 0 && k == half) {
                // DC and the shared +-fs/2 bin take the conjugate-symmetric part.
                g = Complex64::new(g.re, 0.0);
            }
            buf[k] *= g;
            if k != 0 && (n % 2 == 1 || k != half) {
                buf[n - k] *= g.conj();
            }
        }
        fft_inverse(&mut buf);
        self.with_samples(buf.into_iter().map(|c| c.re).collect())
    }

    fn filtered(&self, h: &FrequencyResponse) -> Result<Self> {
        let n = self.samples.len();
        let need_hi = (n / 2) as f64 * self.sample_rate / n as f64;
        h.require(0.0, need_hi)?;
        Ok(self.filtered_by(|f| h.gain_at(f).expect("coverage checked")))
    }
}

impl Filterable for OpticalField {
    fn filtered_by(&self, h: impl Fn(f64) -> Complex64) -> Self {
        let n = self.samples.len();
        let fs = self.sample_rate;
        let mut buf = self.samples.clone();
        fft_forward(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            *b *= h(bin_frequency(k, n, fs));
        }
        fft_inverse(&mut buf);
        self.with_samples(buf)
    }

    fn filtered(&self, h: &FrequencyResponse) -> Result<Self> {
        let n = self.samples.len();
        let fs = self.sample_rate;
        let need_lo = bin_frequency(n / 2, n, fs).min(0.0);
        let need_hi = bin_frequency((n - 1) / 2, n, fs);
        h.require(need_lo, need_hi)?;
        Ok(self.filtered_by(|f| h.gain_at(f).expect("coverage checked")))
    }
}

/// Filters `x` by the tabulated response `h`.
///
/// Real input needs `h` on `[0, fs/2]`; the negative half is taken as the
/// complex conjugate so the output stays real. Complex input needs `h` on every
/// signed transform bin. The convolution is circular and the length is kept.
pub fn apply_frequency_response<T: Filterable>(x: &T, h: &FrequencyResponse) -> Result<T> {
    x.filtered(h)
}

/// Band-limited resampling of one signal period.
///
/// The output has `round(len * new_rate / old_rate)` samples spanning the same
/// period. When that count is not an exact multiple the returned waveform
/// reports the rate implied by the rounded length, so tone frequencies are
/// preserved exactly.
pub fn resample(x: &Waveform, new_rate: f64) -> Result<Waveform> {
    check_rate(new_rate)?;
    let n = x.len();
    let m = ((n as f64) * new_rate / x.sample_rate).round().max(1.0) as usize;
    let samples = fft::resample_real(&x.samples, m);
    let rate = m as f64 * x.sample_rate / n as f64;
    Waveform::new(samples, rate)
}

/// Resamples a complex field period to `m` samples.
pub fn resample_field(x: &OpticalField, new_rate: f64) -> Result<OpticalField> {
    check_rate(new_rate)?;
    let n = x.len();
    let m = ((n as f64) * new_rate / x.sample_rate).round().max(1.0) as usize;
    let samples = fft::resample_complex(&x.samples, m);
    OpticalField::new(samples, m as f64 * x.sample_rate / n as f64, x.wavelength)
}

/// Mean optical power in dBm. An all-zero field returns `f64::NEG_INFINITY`.
pub fn power_dbm(x: &OpticalField) -> f64 {
    let p = x.mean_power();
    if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (p / 1e-3).log10()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn db_to_linear_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
