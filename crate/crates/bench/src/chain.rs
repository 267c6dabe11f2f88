//! The simulated transmission chain, stage by stage.
//!
//! DAC -> VCSEL -> fan-in/MCF/fan-out -> crosstalk -> EDFA/OBPF -> VOA -> PD ->
//! ADC -> synchronization -> equalizer -> BER counter.

use std::f64::consts::PI;

use mcfpam_core::fiberlink::{add_crosstalk, propagate_core};
use mcfpam_core::rxdsp::{
    count_ber, decide_and_demap, equalize, synchronize, BerCount, EqConfig, Synced,
};
use mcfpam_core::rxfe::{
    adc_capture, edfa_agc, photodetect, voa_set_rop, RxNoise, RxParams, ADC_FILTER_ORDER,
};
use mcfpam_core::seed;
use mcfpam_core::sigkit::{
    dbm_to_watts, fft_forward, filters, resample, Filterable, FrequencyResponse, OpticalField,
    Waveform,
};
use mcfpam_core::txdsp::{
    apply_preeq_and_dac, dac_analog, design_preequalizer, map_pam4, prbs15, pulse_shape_at_rate,
    PRBS15_PERIOD,
};
use mcfpam_core::vcsel::{modulate, PROBE_SPACING};
use mcfpam_core::Complex64;

use crate::scenario::Scenario;
use crate::{BenchError, Result};

/// Stream labels for [`seed::derive`].
const STREAM_XT: u64 = 1;
const STREAM_EDFA: u64 = 2;
const STREAM_PD: u64 = 3;

/// Highest probe tone of the channel measurement.
pub const PROBE_SPAN: f64 = 40e9;
/// RMS probe drive relative to the DAC full scale.
const PROBE_LEVEL: f64 = 0.01;
/// Received power used while probing; the measurement is noise-free so the
/// value only sets the scale.
const PROBE_ROP_DBM: f64 = 0.0;

/// Initial PRBS register.
const PRBS_SEED: u32 = 0x7fff;

/// One PRBS-15 period, the reference for every core.
pub fn prbs_period() -> Vec<u8> {
    prbs15(PRBS_SEED, PRBS15_PERIOD).expect("valid seed")
}

/// Transmitted bits of one core: the PRBS period cyclically shifted by
/// `core * prbs_shift` and repeated to fill the leg.
pub fn core_bits(scn: &Scenario, core: usize) -> Vec<u8> {
    let p = prbs_period();
    let shift = core * scn.link.prbs_shift;
    (0..2 * scn.n_symbols)
        .map(|i| p[(i + shift) % p.len()])
        .collect()
}

pub fn core_symbols(scn: &Scenario, core: usize) -> Vec<f64> {
    map_pam4(&core_bits(scn, core)).expect("even bit count")
}

/// Receiver parameters with every noise source off and an ideal ADC.
fn clean_rx(rx: &RxParams) -> RxParams {
    RxParams {
        noise: RxNoise::off(),
        ..rx.clone()
    }
}

/// Launch: scales the VCSEL output to the per-core launch power.
fn launch(field: &OpticalField, launch_dbm: f64) -> OpticalField {
    field.scaled((dbm_to_watts(launch_dbm) / field.mean_power()).sqrt())
}

/// Optical path of one core, from drive voltage to the fan-out.
fn optical_path(scn: &Scenario, drive: &Waveform, core: usize) -> Result<(OpticalField, f64)> {
    let at_sim = resample(drive, scn.sim_rate())?;
    let m = modulate(&scn.vcsel, &at_sim, scn.vcsel.bias)?;
    let field = launch(&m.field, scn.link.launch_dbm);
    Ok((propagate_core(&field, &scn.mcf, core)?, m.clip_fraction))
}

/// Noise-free receiver up to the ADC sample grid, without quantization.
fn clean_receive(scn: &Scenario, field: &OpticalField) -> Result<Waveform> {
    let rx = clean_rx(&scn.rx);
    let amplified = edfa_agc(field, &rx, 0)?;
    let dropped = voa_set_rop(&amplified, PROBE_ROP_DBM)?;
    let i = photodetect(&dropped, &rx, 0)?;
    let bw = rx.adc_bandwidth;
    let filtered = i.filtered_by(|f| filters::butterworth_mag(f, bw, ADC_FILTER_ORDER));
    Ok(resample(&filtered, rx.adc_rate)?)
}

/// Options for [`characterize_link_with`].
#[derive(Debug, Clone, Default)]
pub struct ProbeOptions {
    /// Extra electrical response inserted after the DAC, for self-checks.
    pub planted: Option<FrequencyResponse>,
}

/// End-to-end electrical response of every core: a multitone probe on the
/// 250 MHz grid up to 40 GHz is sent through the noise-free chain and the
/// captured tones are divided by the sent ones. Sending the probe with both
/// signs and differencing cancels even-order distortion. Responses are
/// normalized to unit magnitude at the first tone.
pub fn characterize_link(scn: &Scenario) -> Result<Vec<FrequencyResponse>> {
    characterize_link_with(scn, &ProbeOptions::default())
}

pub fn characterize_link_with(
    scn: &Scenario,
    opts: &ProbeOptions,
) -> Result<Vec<FrequencyResponse>> {
    scn.validate()?;
    let tones = (PROBE_SPAN / PROBE_SPACING).round() as usize;
    let period = 1.0 / PROBE_SPACING;
    let n_dac = (scn.tx.dac_rate * period).round() as usize;
    if tones >= n_dac / 2 {
        return Err(BenchError::BadScenario(format!(
            "the DAC at {:.3e} Sa/s cannot synthesize probe tones up to {PROBE_SPAN:.3e} Hz",
            scn.tx.dac_rate
        )));
    }
    let amp = PROBE_LEVEL * scn.tx.full_scale() * (2.0 / tones as f64).sqrt();
    let probe: Vec<f64> = (0..n_dac)
        .map(|t| {
            (1..=tones)
                .map(|k| {
                    let ph = PI * (k * k) as f64 / tones as f64;
                    amp * (2.0 * PI * (k * t) as f64 / n_dac as f64 + ph).cos()
                })
                .sum()
        })
        .collect();
    let plus = Waveform::new(probe, scn.tx.dac_rate)?;
    let minus = plus.scaled(-1.0);
    let sent = tone_bins(&plus, tones);

    (0..scn.mcf.n_cores)
        .map(|core| {
            let mut diff = vec![Complex64::new(0.0, 0.0); tones];
            for (sign, p) in [(1.0, &plus), (-1.0, &minus)] {
                let mut d = dac_analog(p, &scn.tx);
                if let Some(h) = &opts.planted {
                    d = d.filtered(h)?;
                }
                let at_sim = resample(&d, scn.sim_rate())?;
                let m = modulate(&scn.vcsel, &at_sim, scn.vcsel.bias)?;
                if m.clip_fraction > 0.0 {
                    return Err(BenchError::ProbeClipping {
                        core,
                        fraction: m.clip_fraction,
                    });
                }
                let field = propagate_core(&launch(&m.field, scn.link.launch_dbm), &scn.mcf, core)?;
                let got = tone_bins(&clean_receive(scn, &field)?, tones);
                diff.iter_mut().zip(got).for_each(|(a, g)| *a += g * sign);
            }
            let gains: Vec<Complex64> =
                diff.iter().zip(&sent).map(|(d, s)| d / (2.0 * s)).collect();
            let norm = gains[0].norm();
            let freqs = (1..=tones).map(|k| k as f64 * PROBE_SPACING).collect();
            Ok(FrequencyResponse::new(
                freqs,
                gains.iter().map(|g| g / norm).collect(),
            )?)
        })
        .collect()
}

/// Complex amplitudes of tones 1..=tones of a one-period waveform.
fn tone_bins(x: &Waveform, tones: usize) -> Vec<Complex64> {
    let n = x.len() as f64;
    let mut spec: Vec<Complex64> = x
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft_forward(&mut spec);
    spec[1..=tones].iter().map(|c| c / n).collect()
}

/// Per-core pre-equalizers designed from the measured responses.
pub fn design_preequalizers(
    scn: &Scenario,
    responses: &[FrequencyResponse],
) -> Result<Vec<FrequencyResponse>> {
    responses
        .iter()
        .map(|h| Ok(design_preequalizer(h, scn.tx.preeq_cutoff)?))
        .collect()
}

/// The drive waveform of one core after pre-equalization and the DAC.
pub fn drive_waveform(scn: &Scenario, core: usize, preeq: &FrequencyResponse) -> Result<Waveform> {
    let x = pulse_shape_at_rate(
        &core_symbols(scn, core),
        scn.baud,
        scn.tx.rolloff,
        scn.tx.dac_rate,
    )?;
    Ok(apply_preeq_and_dac(&x, preeq, &scn.tx)?)
}

/// Every core's field at the fan-out, after crosstalk.
#[derive(Debug, Clone)]
pub struct Transmitted {
    pub fields: Vec<OpticalField>,
    /// Fraction of VCSEL samples clipped at zero power, per core.
    pub clip_fraction: Vec<f64>,
}

/// Transmits every core (all lanes are lit) and couples them.
pub fn transmit(scn: &Scenario, preeqs: &[FrequencyResponse]) -> Result<Transmitted> {
    use rayon::prelude::*;
    let per_core: Vec<(OpticalField, f64)> = (0..scn.mcf.n_cores)
        .into_par_iter()
        .map(|core| optical_path(scn, &drive_waveform(scn, core, &preeqs[core])?, core))
        .collect::<Result<_>>()?;
    let (fields, clip_fraction): (Vec<_>, Vec<_>) = per_core.into_iter().unzip();
    let fields = add_crosstalk(
        &fields,
        &scn.mcf,
        seed::derive(scn.master_seed, &[STREAM_XT]),
    )?;
    Ok(Transmitted {
        fields,
        clip_fraction,
    })
}

/// Amplifier, VOA and photodiode of one leg, then the ADC.
pub fn receive(
    scn: &Scenario,
    field: &OpticalField,
    core: usize,
    rop_dbm: f64,
    leg: u64,
) -> Result<Waveform> {
    let labels = |stream| seed::derive(scn.master_seed, &[stream, core as u64, leg]);
    let amplified = edfa_agc(field, &scn.rx, labels(STREAM_EDFA))?;
    let dropped = voa_set_rop(&amplified, rop_dbm)?;
    let i = photodetect(&dropped, &scn.rx, labels(STREAM_PD))?;
    Ok(adc_capture(&i, &scn.rx)?)
}

/// Synchronizes a capture against the transmitted symbols of its core.
pub fn sync_capture(scn: &Scenario, capture: &Waveform, symbols: &[f64]) -> Result<Synced> {
    Ok(synchronize(capture, symbols, scn.baud)?)
}

/// Equalizes, decides and counts errors after the training symbols.
pub fn count_errors(synced: &Synced, symbols: &[f64], eq: &EqConfig) -> Result<BerCount> {
    let out = equalize(&synced.samples, symbols, eq)?;
    let bits = decide_and_demap(&out.estimates[eq.train_len..]);
    Ok(count_ber(&bits, &prbs_period())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcfpam_core::fiberlink::McfParams;

    fn quick(name: &str) -> Scenario {
        Scenario::preset(name).unwrap()
    }

    #[test]
    fn core_bits_are_shifted_prbs() {
        let s = quick("b2b_50g");
        let p = prbs_period();
        let b3 = core_bits(&s, 3);
        assert_eq!(b3.len(), 2 * s.n_symbols);
        assert_eq!(b3[0], p[3 * s.link.prbs_shift % p.len()]);
        assert_eq!(core_bits(&s, 0)[..p.len()], p[..]);
    }

    #[test]
    fn planted_response_is_recovered() {
        let s = quick("b2b_50g");
        let plant = FrequencyResponse::from_fn(FrequencyResponse::linspace(0.0, 60e9, 241), |f| {
            let x = f / 20e9;
            Complex64::from_polar(1.0 - 0.3 * x * x / (1.0 + x * x), -0.4 * x)
        })
        .unwrap();
        let base = characterize_link(&s).unwrap();
        let with = characterize_link_with(
            &s,
            &ProbeOptions {
                planted: Some(plant.clone()),
            },
        )
        .unwrap();
        let g0 = plant.gain_at(PROBE_SPACING).unwrap();
        for ((f, a), b) in base[0]
            .freqs()
            .iter()
            .zip(base[0].gains())
            .zip(with[0].gains())
        {
            if *f > 35e9 {
                continue;
            }
            let want = plant.gain_at(*f).unwrap() / g0;
            let got = b / a;
            let db = 20.0 * (got.norm() / want.norm()).log10();
            let deg = (got / want).arg().to_degrees();
            assert!(db.abs() < 0.2 && deg.abs() < 2.0, "{f}: {db} dB {deg} deg");
        }
    }

    #[test]
    fn back_to_back_is_smooth_low_pass() {
        let s = quick("b2b_50g");
        let h = &characterize_link(&s).unwrap()[0];
        assert!(h.first_null(15.0).is_none_or(|n| n.freq > 35e9));
        let db = h.magnitude_db();
        assert!(db
            .iter()
            .zip(h.freqs())
            .all(|(g, f)| *f > 35e9 || *g > -15.0));
    }

    #[test]
    fn one_km_shows_the_null() {
        let s = quick("mcf1km_50g");
        for h in characterize_link(&s).unwrap() {
            let n = h.first_null(10.0).unwrap();
            assert!((n.freq - 23e9).abs() < 1e9, "null at {}", n.freq);
        }
    }

    #[test]
    fn cores_differ_only_through_the_ripple() {
        let mut s = quick("mcf1km_50g");
        s.mcf = McfParams {
            core_variation: mcfpam_core::fiberlink::RippleSpec::none(),
            ..s.mcf.clone()
        };
        let hs = characterize_link(&s).unwrap();
        for h in &hs[1..] {
            for (a, b) in h.gains().iter().zip(hs[0].gains()) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }
}
