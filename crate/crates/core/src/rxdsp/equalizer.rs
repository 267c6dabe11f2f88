use super::{EqConfig, EqMode, Result, RxDspError, Spacing};
use crate::txdsp::{demap_pam4, PAM4_LEVELS};

/// Equalizer output.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    /// One estimate per symbol, on the normalized +-1/+-3 grid.
    pub estimates: Vec<f64>,
    /// Mean squared error over the last training window.
    pub train_mse: f64,
    pub ff: Vec<f64>,
    pub fb: Vec<f64>,
}

/// Nearest PAM-4 level index, thresholds at -2, 0 and +2.
pub fn decide(x: f64) -> usize {
    if x < -2.0 {
        0
    } else if x < 0.0 {
        1
    } else if x < 2.0 {
        2
    } else {
        3
    }
}

/// Hard decisions and Gray demapping, two bits per estimate.
pub fn decide_and_demap(estimates: &[f64]) -> Vec<u8> {
    estimates
        .iter()
        .flat_map(|&x| {
            let (a, b) = demap_pam4(decide(x));
            [a, b]
        })
        .collect()
}

/// Affine normalization of a two-samples-per-symbol stream onto the reference
/// grid: least-squares fit `x = g ref + o` on the first `train_len` symbol
/// samples, then `(x - o) / g` everywhere.
pub fn normalize_affine(x2: &[f64], reference: &[f64], train_len: usize) -> Result<Vec<f64>> {
    let n = train_len.min(reference.len()).max(2);
    let xs: Vec<f64> = (0..n).map(|m| x2[2 * m]).collect();
    let rs = &reference[..n];
    let (xm, rm) = (
        xs.iter().sum::<f64>() / n as f64,
        rs.iter().sum::<f64>() / n as f64,
    );
    let cov: f64 = xs.iter().zip(rs).map(|(x, r)| (x - xm) * (r - rm)).sum();
    let var: f64 = rs.iter().map(|r| (r - rm).powi(2)).sum();
    if var == 0.0 || cov == 0.0 || !cov.is_finite() {
        return Err(RxDspError::BadInput(
            "training samples carry no reference signal".into(),
        ));
    }
    let g = cov / var;
    let o = xm - g * rm;
    Ok(x2.iter().map(|x| (x - o) / g).collect())
}

fn nearest_level(x: f64) -> f64 {
    PAM4_LEVELS[decide(x)]
}

/// Adaptive LMS feed-forward equalizer cascaded with a decision-feedback
/// equalizer.
///
/// `x2` carries two samples per symbol aligned to `reference` (see
/// `synchronize`); the stream is treated as cyclic. The input is first
/// normalized affinely against the training symbols. The FFE starts as a unit
/// center tap. Training uses the reference for both the error and the
/// feedback; afterwards the taps freeze or keep adapting on decisions.
pub fn equalize(x2: &[f64], reference: &[f64], cfg: &EqConfig) -> Result<Equalized> {
    cfg.validate()?;
    let n = reference.len();
    if x2.len() != 2 * n {
        return Err(RxDspError::BadInput(format!(
            "expected {} samples (2 per symbol), got {}",
            2 * n,
            x2.len()
        )));
    }
    if cfg.train_len > n {
        return Err(RxDspError::BadConfig(format!(
            "train_len {} exceeds the {} available symbols",
            cfg.train_len, n
        )));
    }
    let x = normalize_affine(x2, reference, cfg.train_len.max(2))?;
    if cfg.is_bypass() {
        return Ok(Equalized {
            estimates: (0..n).map(|m| x[2 * m]).collect(),
            train_mse: f64::NAN,
            ff: Vec::new(),
            fb: Vec::new(),
        });
    }

    let len = x.len() as isize;
    let stride: isize = match cfg.ff_spacing {
        Spacing::Symbol => 2,
        Spacing::HalfSymbol => 1,
    };
    let nff = cfg.ff_taps;
    let center = (nff.max(1) as isize - 1) / 2;
    let mut ff = vec![0.0; nff];
    if nff > 0 {
        ff[center as usize] = 1.0;
    }
    let mut fb = vec![0.0; cfg.fb_taps];
    let mut decided = vec![0.0; n];
    let mut estimates = Vec::with_capacity(n);
    let mut window = Vec::with_capacity(n);
    let mut tap_in = vec![0.0; nff];
    let mut fb_in = vec![0.0; cfg.fb_taps];
    let mu = cfg.step_mu;

    for m in 0..n {
        let training = m < cfg.train_len;
        let base = 2 * m as isize;
        let mut y = if nff == 0 {
            x[base as usize]
        } else {
            for (j, t) in tap_in.iter_mut().enumerate() {
                let idx = (base + (j as isize - center) * stride).rem_euclid(len);
                *t = x[idx as usize];
            }
            ff.iter().zip(&tap_in).map(|(w, v)| w * v).sum()
        };
        for (l, p) in fb_in.iter_mut().enumerate() {
            let back = l + 1;
            *p = if m >= back {
                decided[m - back]
            } else {
                reference[(m + n - back) % n]
            };
        }
        y -= fb.iter().zip(&fb_in).map(|(b, p)| b * p).sum::<f64>();
        let d = nearest_level(y);
        let target = if training { reference[m] } else { d };
        decided[m] = target;
        estimates.push(y);
        let adapt = training || cfg.mode == EqMode::DecisionDirected;
        if adapt {
            let e = target - y;
            if training {
                window.push(e * e);
            }
            for (w, v) in ff.iter_mut().zip(&tap_in) {
                *w += mu * e * v;
            }
            for (b, p) in fb.iter_mut().zip(&fb_in) {
                *b -= mu * e * p;
            }
            if !y.is_finite() {
                return Err(RxDspError::Diverged {
                    mu,
                    growth: f64::INFINITY,
                });
            }
        }
    }
    let w = (window.len() / 10).max(1);
    let first = window[..w].iter().sum::<f64>() / w as f64;
    let last = window[window.len() - w..].iter().sum::<f64>() / w as f64;
    if last > 10.0 * first && last > 1e-12 {
        return Err(RxDspError::Diverged {
            mu,
            growth: last / first,
        });
    }
    Ok(Equalized {
        estimates,
        train_mse: last,
        ff,
        fb,
    })
}
