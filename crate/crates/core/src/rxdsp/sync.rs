use num_complex::Complex64;

use super::{Result, RxDspError};
use crate::sigkit::{fft_forward, fft_inverse, resample, Waveform};

/// Samples per symbol of the timing search grid.
pub const SYNC_SPS: usize = 8;

/// Synchronized capture.
#[derive(Debug, Clone, PartialEq)]
pub struct Synced {
    /// Two samples per symbol: `samples[2 m]` is the chosen sampling instant
    /// of reference symbol `m`, `samples[2 m + 1]` lies half a symbol later.
    pub samples: Vec<f64>,
    /// Capture symbol index holding reference symbol 0.
    pub offset: usize,
    /// Sampling phase in units of `1 / SYNC_SPS` symbol.
    pub phase: usize,
    /// Normalized correlation at the chosen offset and phase.
    pub correlation: f64,
}

impl Synced {
    /// One sample per symbol at the common sampling instant.
    pub fn symbol_samples(&self) -> Vec<f64> {
        self.samples.iter().step_by(2).copied().collect()
    }
}

/// Significance threshold for a normalized correlation over `n` symbols.
fn threshold(n: usize) -> f64 {
    (8.0 / (n as f64).sqrt()).max(0.1)
}

/// Finds the cyclic frame offset and the single best sampling phase of a
/// capture holding one period of `reference`.
///
/// The capture is resampled to 8 samples per symbol; every phase is correlated
/// against the reference over all cyclic shifts and the largest normalized
/// correlation wins. One phase serves all four levels.
pub fn synchronize(samples: &Waveform, reference: &[f64], baud: f64) -> Result<Synced> {
    let n = reference.len();
    if n < 2 {
        return Err(RxDspError::BadInput(
            "reference needs at least two symbols".into(),
        ));
    }
    let symbols = samples.duration() * baud;
    if ((symbols - n as f64).abs()) > 1e-6 * n as f64 {
        return Err(RxDspError::CaptureLength {
            got: symbols,
            period: n,
        });
    }
    let x = resample(samples, SYNC_SPS as f64 * baud)?;
    let x = x.samples();
    if x.len() != SYNC_SPS * n {
        return Err(RxDspError::CaptureLength {
            got: x.len() as f64 / SYNC_SPS as f64,
            period: n,
        });
    }
    let rmean = reference.iter().sum::<f64>() / n as f64;
    let mut rspec: Vec<Complex64> = reference
        .iter()
        .map(|r| Complex64::new(r - rmean, 0.0))
        .collect();
    let rnorm = rspec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    fft_forward(&mut rspec);

    let mut best = (0usize, 0usize, 0.0f64);
    for phase in 0..SYNC_SPS {
        let y: Vec<f64> = (0..n).map(|m| x[m * SYNC_SPS + phase]).collect();
        let ymean = y.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex64> = y.iter().map(|v| Complex64::new(v - ymean, 0.0)).collect();
        let ynorm = buf.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if ynorm == 0.0 || rnorm == 0.0 {
            continue;
        }
        fft_forward(&mut buf);
        // c[k] = sum_m y[m] r[m - k]
        for (b, r) in buf.iter_mut().zip(&rspec) {
            *b *= r.conj();
        }
        fft_inverse(&mut buf);
        for (k, c) in buf.iter().enumerate() {
            let rho = c.re / (ynorm * rnorm);
            if rho.abs() > best.2.abs() {
                best = (k, phase, rho);
            }
        }
    }
    let (offset, phase, rho) = best;
    let th = threshold(n);
    if !(rho.abs() >= th) {
        return Err(RxDspError::SyncFailure {
            peak: rho.abs(),
            threshold: th,
        });
    }
    let len = x.len();
    let mut out = Vec::with_capacity(2 * n);
    for m in 0..n {
        let base = (m + offset) * SYNC_SPS + phase;
        out.push(x[base % len]);
        out.push(x[(base + SYNC_SPS / 2) % len]);
    }
    Ok(Synced {
        samples: out,
        offset,
        phase,
        correlation: rho,
    })
}
