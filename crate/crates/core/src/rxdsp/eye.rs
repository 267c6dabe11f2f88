use std::io::Write;

use super::{Result, RxDspError};
use crate::sigkit::Waveform;

/// Two-dimensional histogram of a waveform folded over a few symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeDiagram {
    /// `counts[row][col]`: row 0 is the lowest amplitude bin.
    pub counts: Vec<Vec<u64>>,
    /// Folding window, seconds.
    pub t_span: f64,
    pub amp_min: f64,
    pub amp_max: f64,
}

impl EyeDiagram {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// CSV: a header of column center times, then one row per amplitude bin
    /// (highest first) led by its center amplitude.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let rows = self.counts.len();
        let cols = self.counts.first().map_or(0, |r| r.len());
        write!(w, "amplitude\\time_s")?;
        for c in 0..cols {
            write!(w, ",{:.6e}", (c as f64 + 0.5) * self.t_span / cols as f64)?;
        }
        writeln!(w)?;
        let step = (self.amp_max - self.amp_min) / rows as f64;
        for r in (0..rows).rev() {
            write!(w, "{:.6e}", self.amp_min + (r as f64 + 0.5) * step)?;
            for v in &self.counts[r] {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary portable graymap, brighter for more hits (log scale).
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let rows = self.counts.len();
        let cols = self.counts.first().map_or(0, |r| r.len());
        writeln!(w, "P5\n{cols} {rows}\n255")?;
        let peak = self
            .counts
            .iter()
            .flatten()
            .copied()
            .max()
            .unwrap_or(0)
            .max(1) as f64;
        let mut buf = Vec::with_capacity(rows * cols);
        for r in (0..rows).rev() {
            for &v in &self.counts[r] {
                let g = if v == 0 {
                    0.0
                } else {
                    255.0 * (1.0 + v as f64).ln() / (1.0 + peak).ln()
                };
                buf.push(g.round() as u8);
            }
        }
        w.write_all(&buf)
    }
}

/// Folds `x` modulo `span` symbol periods into a `bins` x `bins` histogram.
pub fn eye_diagram(x: &Waveform, baud: f64, span: usize, bins: usize) -> Result<EyeDiagram> {
    let sps = x.sample_rate() / baud;
    if sps < 4.0 {
        return Err(RxDspError::TooFewSamples(sps));
    }
    if span == 0 || bins == 0 {
        return Err(RxDspError::BadInput(
            "span and bins must be positive".into(),
        ));
    }
    let s = x.samples();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (amp_min, amp_max) = if hi > lo {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = 0.5 * lo.abs().max(1e-12);
        (lo - pad, hi + pad)
    };
    let t_span = span as f64 / baud;
    let mut counts = vec![vec![0u64; bins]; bins];
    let dt = 1.0 / x.sample_rate();
    for (k, &v) in s.iter().enumerate() {
        let t = (k as f64 * dt) % t_span;
        // Round to absorb float error on exact bin edges.
        let col = (((t / t_span) * bins as f64 + 1e-9).floor() as usize).min(bins - 1);
        let row = (((v - amp_min) / (amp_max - amp_min)) * bins as f64).floor() as usize;
        counts[row.min(bins - 1)][col] += 1;
    }
    Ok(EyeDiagram {
        counts,
        t_span,
        amp_min,
        amp_max,
    })
}
