use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<(FftPlanner<f64>, Plans)>> = OnceLock::new();
    let cell = PLANS.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cell.lock().expect("fft planner poisoned");
    let (planner, cache) = &mut *guard;
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place forward DFT, `X[k] = sum x[n] exp(-j 2 pi k n / N)`.
pub fn fft_forward(buf: &mut [Complex64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

/// In-place inverse DFT including the `1/N` normalization.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    if n > 1 {
        plan(n, true).process(buf);
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }
}

/// Signed frequency of transform bin `k`. Bin `N/2` of an even transform is
/// reported as `-fs/2`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let nf = n as f64;
    if k < n.div_ceil(2) {
        k as f64 * fs / nf
    } else {
        (k as f64 - nf) * fs / nf
    }
}

/// Forward transform of a real sequence.
pub fn spectrum(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    fft_forward(&mut buf);
    buf
}

/// Band-limited change of length for one period of a complex signal.
pub(crate) fn resample_complex(x: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = x.len();
    if m == n {
        return x.to_vec();
    }
    let mut spec = x.to_vec();
    fft_forward(&mut spec);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let h = n.min(m);
    // Strictly positive and strictly negative bins below the shared Nyquist.
    let pos = (h - 1) / 2;
    out[0] = spec[0];
    for k in 1..=pos {
        out[k] = spec[k];
        out[m - k] = spec[n - k];
    }
    if h % 2 == 0 {
        let k = h / 2;
        if n < m {
            // Split the input Nyquist bin between +k and -k.
            out[k] = spec[k] * 0.5;
            out[m - k] += spec[k] * 0.5;
        } else {
            // Fold both input bins onto the output Nyquist bin.
            out[k] = spec[k] + spec[n - k];
        }
    }
    fft_inverse(&mut out);
    let scale = m as f64 / n as f64;
    out.iter_mut().for_each(|c| *c *= scale);
    out
}

pub(crate) fn resample_real(x: &[f64], m: usize) -> Vec<f64> {
    let c: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    resample_complex(&c, m).into_iter().map(|c| c.re).collect()
}
