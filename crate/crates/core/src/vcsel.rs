//! Behavioral 1550 nm single-mode VCSEL: static L-I-V, small-signal intensity
//! response, and large-signal conversion of a drive voltage into an optical
//! field carrying both intensity and chirp.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiberlink::{self, disperse};
use crate::sigkit::{
    bin_frequency, fft_forward, fft_inverse, Filterable, FrequencyResponse, Null, OpticalField,
    SigError, Waveform,
};

/// Series resistance seen by the drive voltage (probe plus VCSEL), ohms.
pub const R_DRIVE: f64 = 140.0;

/// Clipped-sample fraction above which a modulation is flagged as overdriven.
pub const CLIP_WARN_FRACTION: f64 = 1e-3;

/// Relative depth a response minimum must reach to count as a null.
pub const NULL_MIN_DEPTH_DB: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VcselError {
    #[error("negative drive current {0} A")]
    NegativeCurrent(f64),
    #[error("bias {bias} A outside (i_th, i_rollover] = ({i_th}, {i_rollover}]")]
    BadBias {
        bias: f64,
        i_th: f64,
        i_rollover: f64,
    },
    #[error("invalid VCSEL parameters: {0}")]
    BadParams(String),
    #[error("null position does not depend on kappa when alpha_h = 0")]
    Insensitive,
    #[error(
        "no kappa in [{kappa_lo:.4e}, {kappa_hi:.4e}] rad Hz/W places the null at {target:.4e} Hz \
         (reachable: {notch_lo:.4e} to {notch_hi:.4e} Hz)"
    )]
    Unreachable {
        target: f64,
        kappa_lo: f64,
        kappa_hi: f64,
        notch_lo: f64,
        notch_hi: f64,
    },
    #[error("no null found in the simulated response below {0:.4e} Hz")]
    NoNull(f64),
    #[error(transparent)]
    Fiber(#[from] fiberlink::FiberError),
    #[error(transparent)]
    Signal(#[from] SigError),
}

pub type Result<T> = std::result::Result<T, VcselError>;

/// Level-dependent rise/fall: a one-pole smoother whose time constant moves
/// linearly from `tau_low` at zero power to `tau_high` at `p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EyeSkew {
    pub tau_low: f64,
    pub tau_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VcselParams {
    /// Threshold current, A.
    pub i_th: f64,
    /// Current of peak static output power, A.
    pub i_rollover: f64,
    /// Static output power at rollover, W.
    pub p_max: f64,
    /// Monotone (current A, voltage V) table.
    pub v_curve: Vec<[f64; 2]>,
    pub alpha_h: f64,
    /// Adiabatic chirp coefficient, rad Hz / W.
    pub kappa: f64,
    /// Relaxation-oscillation frequency at `bias`, Hz.
    pub f_r: f64,
    /// Damping rate at `bias`, 1/s.
    pub gamma_d: f64,
    /// Slope of damping against `f_r^2`, s.
    pub k_factor: f64,
    /// Parasitic pole, Hz.
    pub f_p: f64,
    /// Operating bias, A.
    pub bias: f64,
    /// Emission wavelength, m.
    pub wavelength: f64,
    pub eye_skew: Option<EyeSkew>,
}

impl Default for VcselParams {
    fn default() -> Self {
        Self {
            i_th: 1.5e-3,
            i_rollover: 8e-3,
            p_max: 2e-3,
            v_curve: vec![
                [0.0, 0.0],
                [0.5e-3, 0.85],
                [1.5e-3, 1.05],
                [4e-3, 1.45],
                [8e-3, 2.05],
                [12e-3, 2.6],
            ],
            alpha_h: 12.0,
            kappa: 0.0,
            // 20.0 GHz small-signal bandwidth at 7 mA.
            f_r: 38.645e9,
            gamma_d: 4.3706e11,
            k_factor: 0.25e-9,
            f_p: 30e9,
            bias: 7.8e-3,
            wavelength: 1550e-9,
            eye_skew: None,
        }
    }
}

impl VcselParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(VcselError::BadParams(m.into()));
        if !(self.i_th > 0.0 && self.i_th < self.i_rollover) {
            return bad("need 0 < i_th < i_rollover");
        }
        if !(self.p_max > 0.0) {
            return bad("p_max must be positive");
        }
        if !(self.alpha_h >= 0.0) || !(self.kappa >= 0.0) {
            return bad("alpha_h and kappa must be non-negative");
        }
        if !(self.f_r > 0.0 && self.gamma_d > 0.0 && self.f_p > 0.0 && self.k_factor >= 0.0) {
            return bad("f_r, gamma_d, f_p must be positive");
        }
        if !(self.wavelength > 1e-6 && self.wavelength < 2e-6) {
            return bad("wavelength outside (1 um, 2 um)");
        }
        if self.v_curve.len() < 2
            || self
                .v_curve
                .windows(2)
                .any(|w| !(w[1][0] > w[0][0] && w[1][1] > w[0][1]))
        {
            return bad("v_curve needs at least two strictly increasing points");
        }
        if let Some(s) = self.eye_skew {
            if !(s.tau_low >= 0.0 && s.tau_high >= 0.0) {
                return bad("eye skew time constants must be non-negative");
            }
        }
        self.check_bias(self.bias)
    }

    fn check_bias(&self, bias: f64) -> Result<()> {
        if bias > self.i_th && bias <= self.i_rollover {
            Ok(())
        } else {
            Err(VcselError::BadBias {
                bias,
                i_th: self.i_th,
                i_rollover: self.i_rollover,
            })
        }
    }

    fn static_power(&self, i: f64) -> f64 {
        if i <= self.i_th {
            return 0.0;
        }
        let x = (i - self.i_rollover) / (self.i_rollover - self.i_th);
        (self.p_max * (1.0 - x * x)).max(0.0)
    }

    /// Slope used for fast modulation, W/A: the isothermal slope, equal to the
    /// static slope just above threshold. Self-heating does not follow the
    /// modulation, so the static rollover is not applied to it.
    pub fn dynamic_slope(&self) -> f64 {
        2.0 * self.p_max / (self.i_rollover - self.i_th)
    }

    /// Relaxation-oscillation frequency and damping rate at `bias`.
    pub fn resonance_at(&self, bias: f64) -> (f64, f64) {
        let fr = self.f_r * ((bias - self.i_th) / (self.bias - self.i_th)).sqrt();
        let gamma = self.gamma_d + self.k_factor * (fr * fr - self.f_r * self.f_r);
        (fr, gamma)
    }

    /// Small-signal current-to-power response at `bias`, 1 at DC.
    pub fn s21_at(&self, bias: f64, f: f64) -> Complex64 {
        let (fr, gamma) = self.resonance_at(bias);
        let fr2 = fr * fr;
        let res = Complex64::new(fr2, 0.0) / Complex64::new(fr2 - f * f, f * gamma / (2.0 * PI));
        res / Complex64::new(1.0, f / self.f_p)
    }
}

/// Static output power (W) and voltage (V) at current `i` (A).
pub fn static_liv(params: &VcselParams, i: f64) -> Result<(f64, f64)> {
    if !(i >= 0.0) {
        return Err(VcselError::NegativeCurrent(i));
    }
    let t = &params.v_curve;
    let seg = t
        .windows(2)
        .position(|w| i <= w[1][0])
        .unwrap_or(t.len() - 2);
    let (a, b) = (t[seg], t[seg + 1]);
    let v = a[1] + (b[1] - a[1]) * (i - a[0]) / (b[0] - a[0]);
    Ok((params.static_power(i), v))
}

/// Small-signal modulation response at `bias` on a 50 MHz grid to 100 GHz.
pub fn small_signal_s21(params: &VcselParams, bias: f64) -> Result<FrequencyResponse> {
    params.check_bias(bias)?;
    let freqs = FrequencyResponse::linspace(0.0, 100e9, 2001);
    Ok(FrequencyResponse::from_fn(freqs, |f| {
        params.s21_at(bias, f)
    })?)
}

/// Frequency where `|S21|` first falls 3 dB below its DC value.
pub fn bandwidth_3db(params: &VcselParams, bias: f64) -> Result<f64> {
    params.check_bias(bias)?;
    let below = |f: f64| params.s21_at(bias, f).norm_sqr() < 0.5;
    let mut hi = 1e8;
    while !below(hi) {
        hi += 1e8;
        if hi > 1e12 {
            return Err(VcselError::BadParams("no 3 dB point below 1 THz".into()));
        }
    }
    let mut lo = hi - 1e8;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Output of [`modulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub field: OpticalField,
    /// Fraction of samples where the intensity path had to be clipped at zero.
    pub clip_fraction: f64,
}

impl Modulated {
    pub fn overdriven(&self) -> bool {
        self.clip_fraction > CLIP_WARN_FRACTION
    }
}

/// Integrates one period of a zero-mean signal in the frequency domain.
fn periodic_integral(x: &[f64], fs: f64) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        let f = bin_frequency(k, n, fs);
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            *b = Complex64::new(0.0, 0.0);
        } else {
            *b /= Complex64::new(0.0, 2.0 * PI * f);
        }
    }
    fft_inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Converts a drive voltage into the emitted optical field.
///
/// The current is `bias + drive / R_DRIVE`. Intensity is the static power at
/// bias plus the dynamic slope times the current deviation shaped by the
/// small-signal response, clipped at zero. The phase obeys
/// `dphi/dt = (alpha_h / 2) ((1/p) dp/dt + kappa p)`.
///
/// The drive is one period of a periodic signal. The constant frequency offset
/// `(alpha_h / 2) kappa mean(p)` is part of the emission wavelength at bias, so
/// the field carries only the mean-free phase and stays centered on
/// `wavelength`, where the receiver filter is tuned.
pub fn modulate(params: &VcselParams, drive: &Waveform, bias: f64) -> Result<Modulated> {
    params.validate()?;
    params.check_bias(bias)?;
    let fs = drive.sample_rate();
    let n = drive.len();
    let p0 = params.static_power(bias);
    let eta = params.dynamic_slope();

    let i_ac = drive.scaled(1.0 / R_DRIVE);
    let shaped = i_ac.filtered_by(|f| params.s21_at(bias, f));
    let mut clipped = 0usize;
    let mut p: Vec<f64> = shaped
        .samples()
        .iter()
        .map(|&di| {
            let v = p0 + eta * di;
            if v < 0.0 {
                clipped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();

    if let Some(skew) = params.eye_skew {
        let dt = 1.0 / fs;
        let mut y = p[n - 1];
        // The second pass starts from the settled end state of the first.
        let mut out = vec![0.0; n];
        for pass in 0..2 {
            for (k, &x) in p.iter().enumerate() {
                let tau =
                    skew.tau_low + (skew.tau_high - skew.tau_low) * (x / params.p_max).min(2.0);
                y += (x - y)
                    * if tau > 0.0 {
                        1.0 - (-dt / tau).exp()
                    } else {
                        1.0
                    };
                if pass == 1 {
                    out[k] = y;
                }
            }
        }
        p = out;
    }

    let half_alpha = params.alpha_h / 2.0;
    let mean_p = p.iter().sum::<f64>() / n as f64;
    let floor = 1e-4 * mean_p.max(1e-12);
    let mut phase: Vec<f64> = p.iter().map(|&v| half_alpha * v.max(floor).ln()).collect();
    if params.kappa > 0.0 && half_alpha > 0.0 {
        let ac: Vec<f64> = p.iter().map(|v| v - mean_p).collect();
        let integ = periodic_integral(&ac, fs);
        for (ph, q) in phase.iter_mut().zip(&integ) {
            *ph += half_alpha * params.kappa * q;
        }
    }
    let mean_phase = phase.iter().sum::<f64>() / n as f64;
    let samples = p
        .iter()
        .zip(&phase)
        .map(|(&v, &ph)| Complex64::from_polar(v.sqrt(), ph - mean_phase))
        .collect();
    Ok(Modulated {
        field: OpticalField::new(samples, fs, params.wavelength)?,
        clip_fraction: clipped as f64 / n as f64,
    })
}

/// Tone spacing of the small-signal link probe.
pub const PROBE_SPACING: f64 = 250e6;

/// Small-signal response of modulate, dispersion and square-law detection,
/// normalized to the same chain without dispersion.
///
/// Tones sit on a 250 MHz grid up to `f_max`; even-order distortion is removed
/// by differencing runs with opposite drive polarity. The response is 1 at DC.
pub fn link_response(params: &VcselParams, d_total: f64, f_max: f64) -> Result<FrequencyResponse> {
    params.validate()?;
    let tones = (f_max / PROBE_SPACING).round().max(2.0) as usize;
    let n = 4 * tones;
    let fs = n as f64 * PROBE_SPACING;
    // Per-tone current a tiny fraction of the bias above threshold.
    let amp = 1e-4 * (params.bias - params.i_th) * R_DRIVE / (tones as f64).sqrt();
    let drive: Vec<f64> = (0..n)
        .map(|t| {
            (1..=tones)
                .map(|k| {
                    let ph = PI * (k * k) as f64 / tones as f64;
                    amp * (2.0 * PI * (k * t) as f64 / n as f64 + ph).cos()
                })
                .sum()
        })
        .collect();
    let plus = Waveform::new(drive, fs)?;
    let minus = plus.scaled(-1.0);
    let tone_spectrum = |d: f64| -> Result<Vec<Complex64>> {
        let mut diff: Option<Vec<Complex64>> = None;
        for (sign, w) in [(1.0, &plus), (-1.0, &minus)] {
            let field = modulate(params, w, params.bias)?.field;
            let field = disperse(&field, d);
            let mut spec: Vec<Complex64> = field
                .intensity()
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            fft_forward(&mut spec);
            match diff.as_mut() {
                None => diff = Some(spec.into_iter().map(|c| c * sign).collect()),
                Some(acc) => acc.iter_mut().zip(spec).for_each(|(a, c)| *a += c * sign),
            }
        }
        Ok(diff.unwrap())
    };
    let with = tone_spectrum(d_total)?;
    let without = tone_spectrum(0.0)?;
    let mut freqs = vec![0.0];
    let mut gains = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=tones {
        freqs.push(k as f64 * PROBE_SPACING);
        gains.push(with[k] / without[k]);
    }
    Ok(FrequencyResponse::new(freqs, gains)?)
}

/// First null of [`link_response`] for the given parameters.
pub fn simulated_null(params: &VcselParams, d_total: f64, f_max: f64) -> Result<Option<Null>> {
    Ok(link_response(params, d_total, f_max)?.first_null(NULL_MIN_DEPTH_DB))
}

/// Search range for the adiabatic chirp, as the corner `kappa p / (2 pi)` in Hz.
const KAPPA_CORNER_MAX: f64 = 20e9;

fn probe_span(target: f64) -> f64 {
    (2.0 * target).max(40e9)
}

/// Finds `kappa` such that the simulated small-signal null after `d_total`
/// (ps/nm) lies at `target_notch`.
///
/// The null present at `kappa = 0` is followed as `kappa` grows, in steps of
/// the chirp corner `kappa p / (2 pi)`, until it fills in or jumps elsewhere.
/// The step that crosses the target is then refined by bisection.
pub fn calibrate_kappa(params: &VcselParams, target_notch: f64, d_total: f64) -> Result<f64> {
    params.validate()?;
    if params.alpha_h == 0.0 {
        return Err(VcselError::Insensitive);
    }
    let f_max = probe_span(target_notch);
    let per_hz = 2.0 * PI / params.static_power(params.bias);
    let kappa_hi = KAPPA_CORNER_MAX * per_hz;
    let null_at = |kappa: f64| -> Result<Option<f64>> {
        let p = VcselParams {
            kappa,
            ..params.clone()
        };
        Ok(simulated_null(&p, d_total, f_max)?.map(|n| n.freq))
    };
    let f0 = null_at(0.0)?.ok_or(VcselError::NoNull(f_max))?;
    let steps = 80;
    let mut track = vec![(0.0, f0)];
    for s in 1..=steps {
        let kappa = kappa_hi * s as f64 / steps as f64;
        let prev = track.last().unwrap().1;
        match null_at(kappa)? {
            Some(f) if (f - prev).abs() <= 0.05 * prev => track.push((kappa, f)),
            _ => break,
        }
    }
    let lo = track.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let hi = track.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if target_notch < lo || target_notch > hi {
        return Err(VcselError::Unreachable {
            target: target_notch,
            kappa_lo: 0.0,
            kappa_hi: track.last().unwrap().0,
            notch_lo: lo,
            notch_hi: hi,
        });
    }
    let seg = track
        .windows(2)
        .find(|w| (w[0].1 - target_notch) * (w[1].1 - target_notch) <= 0.0)
        .map(|w| (w[0], w[1]));
    let Some(((mut ka, fa), (mut kb, _))) = seg else {
        return Ok(0.0);
    };
    let rising = fa < target_notch;
    for _ in 0..60 {
        let mid = 0.5 * (ka + kb);
        let f = null_at(mid)?.ok_or(VcselError::NoNull(f_max))?;
        if (f - target_notch).abs() <= 1e-4 * target_notch {
            return Ok(mid);
        }
        if (f < target_notch) == rising {
            ka = mid;
        } else {
            kb = mid;
        }
    }
    Ok(0.5 * (ka + kb))
}

/// Fits `alpha_h` and `kappa` together so the simulated null after `d_total`
/// lies at `target_notch` with depth `target_depth_db` (negative dB).
///
/// Alternates two bisections: `alpha_h` for the null position (which falls as
/// `alpha_h` grows) and `kappa` for the depth (which fills in as `kappa`
/// grows).
pub fn fit_chirp(
    params: &VcselParams,
    target_notch: f64,
    target_depth_db: f64,
    d_total: f64,
) -> Result<(f64, f64)> {
    params.validate()?;
    let f_max = probe_span(target_notch);
    let p0 = params.static_power(params.bias);
    let eval = |alpha_h: f64, kappa: f64| -> Result<Option<Null>> {
        let p = VcselParams {
            alpha_h,
            kappa,
            ..params.clone()
        };
        simulated_null(&p, d_total, f_max)
    };
    let mut alpha = params.alpha_h.max(0.5);
    let mut kappa = params.kappa;
    for _ in 0..20 {
        // Position: larger alpha moves the null down.
        let (mut lo, mut hi) = (1e-3, 50.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            match eval(mid, kappa)? {
                Some(n) if n.freq < target_notch => hi = mid,
                _ => lo = mid,
            }
        }
        alpha = 0.5 * (lo + hi);
        // Depth: larger kappa fills the null.
        let (mut lo, mut hi) = (0.0, 2.0 * PI * KAPPA_CORNER_MAX / p0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            match eval(alpha, mid)? {
                Some(n) if n.depth_db < target_depth_db => lo = mid,
                _ => hi = mid,
            }
        }
        kappa = 0.5 * (lo + hi);
        let n = eval(alpha, kappa)?.ok_or(VcselError::NoNull(f_max))?;
        if (n.freq - target_notch).abs() < 1e-3 * target_notch
            && (n.depth_db - target_depth_db).abs() < 0.05
        {
            return Ok((alpha, kappa));
        }
    }
    Ok((alpha, kappa))
}
