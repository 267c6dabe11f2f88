use num_complex::Complex64;

use super::{Result, TxError};
use crate::sigkit::FrequencyResponse;

/// Channel magnitudes more than this far below the channel peak are clamped
/// before inversion.
pub const REGULARIZATION_FLOOR_DB: f64 = -35.0;

/// Highest frequency the designed response is tabulated to.
const TABLE_SPAN: f64 = 200e9;

/// Zero-forcing transmitter pre-equalizer for a measured end-to-end response.
///
/// Below `cutoff` the gain is the inverse of the channel, with the channel
/// magnitude clamped at [`REGULARIZATION_FLOOR_DB`] below its peak. Above the
/// cutoff the magnitude is held at its cutoff value and the phase continues
/// with the slope it had just below the cutoff, so out-of-band frequencies are
/// not amplified further. The result is scaled to 0 dB at DC and tabulated from
/// DC to 200 GHz.
pub fn design_preequalizer(h_e2e: &FrequencyResponse, cutoff: f64) -> Result<FrequencyResponse> {
    let freqs = h_e2e.freqs();
    let gains = h_e2e.gains();
    if freqs[0] < 0.0 {
        return Err(TxError::BadConfig(
            "end-to-end response must be one-sided (f >= 0)".into(),
        ));
    }
    let in_band: Vec<usize> = (0..freqs.len()).filter(|&i| freqs[i] <= cutoff).collect();
    let peak = in_band.iter().map(|&i| gains[i].norm()).fold(0.0, f64::max);
    if peak == 0.0 || !(peak.is_finite()) {
        return Err(TxError::ChannelZero);
    }
    let floor = peak * 10f64.powf(REGULARIZATION_FLOOR_DB / 20.0);
    let invert = |g: Complex64| -> Complex64 {
        let mag = g.norm();
        if mag >= floor {
            g.inv()
        } else if mag == 0.0 {
            Complex64::new(1.0 / floor, 0.0)
        } else {
            Complex64::from_polar(1.0 / floor, -g.arg())
        }
    };

    // Inverse on the measured in-band grid, with DC prepended if missing.
    let mut grid: Vec<f64> = Vec::new();
    let mut inv: Vec<Complex64> = Vec::new();
    if freqs[0] > 0.0 {
        grid.push(0.0);
        inv.push(Complex64::new(1.0 / gains[0].norm().max(floor), 0.0));
    }
    for &i in &in_band {
        grid.push(freqs[i]);
        inv.push(invert(gains[i]));
    }
    let cut_gain = h_e2e.gain_at(cutoff);
    let last_f = *grid.last().unwrap();
    if let Some(g) = cut_gain {
        if cutoff > last_f {
            grid.push(cutoff);
            inv.push(invert(g));
        }
    }

    // Phase slope over the top of the band, from the unwrapped phase.
    let top = grid.len();
    let start = top.saturating_sub(8).max(1);
    let mut phase: Vec<f64> = inv[start - 1..top].iter().map(|g| g.arg()).collect();
    for i in 1..phase.len() {
        let mut d = phase[i] - phase[i - 1];
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        phase[i] = phase[i - 1] + d;
    }
    let f_fit = &grid[start - 1..top];
    let slope = if f_fit.len() >= 2 {
        let fm = f_fit.iter().sum::<f64>() / f_fit.len() as f64;
        let pm = phase.iter().sum::<f64>() / phase.len() as f64;
        let num: f64 = f_fit
            .iter()
            .zip(&phase)
            .map(|(f, p)| (f - fm) * (p - pm))
            .sum();
        let den: f64 = f_fit.iter().map(|f| (f - fm).powi(2)).sum();
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    } else {
        0.0
    };

    let edge_f = *grid.last().unwrap();
    let edge = *inv.last().unwrap();
    let step = if grid.len() >= 2 {
        (grid[grid.len() - 1] - grid[grid.len() - 2]).max(1e6)
    } else {
        250e6
    };
    let mut f = edge_f + step;
    while f <= TABLE_SPAN {
        grid.push(f);
        inv.push(edge * Complex64::from_polar(1.0, slope * (f - edge_f)));
        f += step;
    }

    let dc = inv[0].norm();
    let inv = inv.into_iter().map(|g| g / dc).collect();
    Ok(FrequencyResponse::new(grid, inv)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (1..=160).map(|k| k as f64 * 250e6).collect()
    }

    /// Smooth low-pass with a Lorentzian-shaped notch of the given depth at 23 GHz.
    fn notch_channel(depth_db: f64) -> FrequencyResponse {
        let floor = 10f64.powf(depth_db / 20.0);
        FrequencyResponse::from_fn(grid(), |f| {
            let x = (f - 23e9) / 0.5e9;
            let notch = 1.0 - (1.0 - floor) / (1.0 + x * x);
            Complex64::from_polar(notch, -2.0 * std::f64::consts::PI * f * 20e-12)
        })
        .unwrap()
    }

    #[test]
    fn flat_channel_gives_flat_preeq() {
        let h = FrequencyResponse::flat(grid()).unwrap();
        let p = design_preequalizer(&h, 26e9).unwrap();
        for (f, g) in p.freqs().iter().zip(p.gains()) {
            if *f <= 26e9 {
                assert!((g.norm() - 1.0).abs() < 1e-12);
            }
        }
        assert!(*p.freqs().last().unwrap() >= 46e9);
    }

    #[test]
    fn thirty_db_notch_is_boosted_thirty_db() {
        let p = design_preequalizer(&notch_channel(-30.0), 26e9).unwrap();
        let at = p.gain_at(23e9).unwrap();
        let boost = 20.0 * (at.norm() / p.gain_at(0.0).unwrap().norm()).log10();
        assert!((boost - 30.0).abs() < 0.05, "boost {boost}");
    }

    #[test]
    fn deeper_notch_leaves_less_low_frequency_gain_after_the_dac() {
        use crate::sigkit::spectrum;
        use crate::txdsp::{apply_preeq_and_dac, map_pam4, prbs15, pulse_shape_at_rate, TxConfig};
        let cfg = TxConfig::default();
        let symbols = map_pam4(&prbs15(0x7fff, 5000).unwrap()).unwrap();
        let x = pulse_shape_at_rate(&symbols, cfg.baud, cfg.rolloff, cfg.dac_rate).unwrap();
        let sx = spectrum(x.samples());
        // Least-squares gain of the bins below 2 GHz.
        let low_gain = |depth_db: f64| {
            let p = design_preequalizer(&notch_channel(depth_db), cfg.preeq_cutoff).unwrap();
            let y = apply_preeq_and_dac(&x, &p, &cfg).unwrap();
            let sy = spectrum(y.samples());
            let bins = 1..(2e9 * x.duration()) as usize;
            let num: Complex64 = bins.clone().map(|k| sy[k] * sx[k].conj()).sum();
            let den: f64 = bins.map(|k| sx[k].norm_sqr()).sum();
            num.norm() / den
        };
        let (deep, shallow) = (low_gain(-30.0), low_gain(-22.0));
        assert!(deep < shallow, "-30 dB: {deep}, -22 dB: {shallow}");
    }

    #[test]
    fn deep_notch_is_clamped() {
        let p = design_preequalizer(&notch_channel(-50.0), 26e9).unwrap();
        let boost = 20.0 * p.gain_at(23e9).unwrap().norm().log10();
        assert!(
            (boost + REGULARIZATION_FLOOR_DB).abs() < 0.05,
            "boost {boost}"
        );
    }

    #[test]
    fn composite_is_flat_in_band_and_held_above_cutoff() {
        let h = notch_channel(-25.0);
        let p = design_preequalizer(&h, 26e9).unwrap();
        for &f in h.freqs().iter().filter(|&&f| f <= 26e9) {
            let c = h.gain_at(f).unwrap() * p.gain_at(f).unwrap();
            assert!((20.0 * c.norm().log10()).abs() < 0.5);
        }
        let at_cut = p.gain_at(26e9).unwrap().norm();
        for &f in &[27e9, 35e9, 45e9, 100e9] {
            assert!((p.gain_at(f).unwrap().norm() - at_cut).abs() < 1e-9 * at_cut);
        }
        // Delay is continued: phase keeps advancing at 2 pi * 20 ps per Hz.
        let d = (p.gain_at(30e9).unwrap() / p.gain_at(29e9).unwrap()).arg();
        assert!((d - 2.0 * std::f64::consts::PI * 1e9 * 20e-12).abs() < 1e-3);
    }

    #[test]
    fn zero_channel_is_an_error() {
        let h = FrequencyResponse::from_fn(grid(), |_| Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(design_preequalizer(&h, 26e9), Err(TxError::ChannelZero));
    }
}
