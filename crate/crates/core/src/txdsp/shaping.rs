use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Result, TxConfig, TxError};
use crate::sigkit::{bin_frequency, fft_forward, fft_inverse, Waveform};

/// Raised-cosine spectrum, unity in the passband and zero beyond
/// `(1 + rolloff) * baud / 2`.
pub fn raised_cosine(f: f64, baud: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let f1 = (1.0 - rolloff) * baud / 2.0;
    let f2 = (1.0 + rolloff) * baud / 2.0;
    if f <= f1 {
        1.0
    } else if f > f2 {
        0.0
    } else {
        0.5 * (1.0 + (PI / (rolloff * baud) * (f - f1)).cos())
    }
}

/// Raised-cosine filtered symbol stream at `cfg.sps` samples per symbol.
pub fn pulse_shape(symbols: &[f64], cfg: &TxConfig) -> Result<Waveform> {
    if cfg.sps < 2 {
        return Err(TxError::BadConfig(format!(
            "sps must be at least 2, got {}",
            cfg.sps
        )));
    }
    pulse_shape_at_rate(symbols, cfg.baud, cfg.rolloff, cfg.baud * cfg.sps as f64)
}

/// Raised-cosine filtered symbol stream sampled at an arbitrary `rate`.
///
/// The symbols are one period of a periodic sequence. The shaped signal is
/// built from its Fourier series, so the rate only needs `len * rate / baud` to
/// be an integer, not an integer number of samples per symbol. Samples that
/// land on symbol centers equal the symbol values up to rounding.
pub fn pulse_shape_at_rate(
    symbols: &[f64],
    baud: f64,
    rolloff: f64,
    rate: f64,
) -> Result<Waveform> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(TxError::BadRolloff(rolloff));
    }
    let n = symbols.len();
    let m_exact = n as f64 * rate / baud;
    let m = m_exact.round() as usize;
    if n == 0 || (m as f64 - m_exact).abs() > 1e-6 * m_exact.max(1.0) {
        return Err(TxError::NonIntegerLength(m_exact));
    }
    if rate / 2.0 < (1.0 + rolloff) * baud / 2.0 {
        return Err(TxError::BadConfig(format!(
            "rate {rate:.3e} cannot carry a {rolloff} roll-off signal at {baud:.3e} baud"
        )));
    }
    let mut sym: Vec<Complex64> = symbols.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    fft_forward(&mut sym);
    let scale = m as f64 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (j, o) in out.iter_mut().enumerate() {
        let f = bin_frequency(j, m, rate);
        let g = raised_cosine(f, baud, rolloff);
        if g != 0.0 {
            let signed = if j < m.div_ceil(2) {
                j as i64
            } else {
                j as i64 - m as i64
            };
            let src = signed.rem_euclid(n as i64) as usize;
            *o = sym[src] * (g * scale);
        }
    }
    fft_inverse(&mut out);
    Ok(Waveform::new(
        out.into_iter().map(|c| c.re).collect(),
        rate,
    )?)
}
