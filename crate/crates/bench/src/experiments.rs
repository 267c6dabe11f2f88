//! Scenario runs and the sweeps built on them.

use mcfpam_core::fiberlink::predict_notch;
use mcfpam_core::rxdsp::{eye_diagram, BerCount, BerRecord, EqConfig, EyeDiagram, Spacing, Synced};
use mcfpam_core::sigkit::{resample, FrequencyResponse, Null, Waveform};
use mcfpam_core::vcsel::{simulated_null, VcselParams, NULL_MIN_DEPTH_DB};
use rayon::prelude::*;

use crate::chain::{
    characterize_link, core_symbols, count_errors, design_preequalizers, receive, sync_capture,
    transmit, Transmitted,
};
use crate::scenario::Scenario;
use crate::Result;

/// Samples per symbol of exported eye diagrams.
const EYE_SPS: usize = 16;
const EYE_SPAN: usize = 2;
const EYE_BINS: usize = 64;
/// An equalizer that has failed this many legs without counting one is given
/// up on at that point.
const GIVE_UP_LEGS: usize = 2;

/// A leg that could not be counted. Recorded, not fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct LegFailure {
    pub core_idx: usize,
    pub rop_dbm: f64,
    pub leg: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<BerRecord>,
    pub failures: Vec<LegFailure>,
    /// Eye diagram of each counted core at the highest RoP.
    pub eyes: Vec<(usize, EyeDiagram)>,
    /// Measured end-to-end response of every core.
    pub responses: Vec<FrequencyResponse>,
    /// Fraction of VCSEL samples clipped, per core.
    pub clip_fraction: Vec<f64>,
    /// Counted cores x baud x 2 bits, bit/s.
    pub aggregate_bps: f64,
}

impl RunReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&format!(
                "core {} rop {:+.2} dBm: ber {:.3e} ({} / {} bits) hd-fec {} kp4 {}\n",
                r.core_idx,
                r.rop_dbm,
                r.ber,
                r.bit_errors,
                r.bits_compared,
                pass(r.fec_7pct_pass),
                pass(r.fec_kp4_pass)
            ));
        }
        for f in &self.failures {
            s.push_str(&format!(
                "core {} rop {:+.2} dBm leg {}: {}\n",
                f.core_idx, f.rop_dbm, f.leg, f.message
            ));
        }
        s.push_str(&format!(
            "aggregate throughput: {:.0} Gb/s\n",
            self.aggregate_bps / 1e9
        ));
        s
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

/// Counts of one (core, RoP) point for several equalizers on shared legs.
struct Point {
    core: usize,
    rop: f64,
    counts: Vec<BerCount>,
    failures: Vec<LegFailure>,
    eye: Option<EyeDiagram>,
}

/// Receives legs of one core at one RoP until every equalizer has
/// `min_errors` errors or `max_bits` compared bits. Leg noise depends on
/// (seed, core, leg) only, so different RoPs and equalizers share noise.
fn measure_point(
    scn: &Scenario,
    tx: &Transmitted,
    core: usize,
    rop: f64,
    eqs: &[EqConfig],
    want_eye: bool,
) -> Result<Point> {
    let symbols = core_symbols(scn, core);
    let mut counts = vec![BerCount::default(); eqs.len()];
    let mut failed = vec![0usize; eqs.len()];
    let mut failures = Vec::new();
    let mut eye = None;
    let min_train = eqs.iter().map(|e| e.train_len).max().unwrap_or(0);
    let per_leg = 2 * (scn.n_symbols - min_train) as u64;
    let max_legs = scn.link.max_bits.div_ceil(per_leg.max(1)).max(1);
    for leg in 0..max_legs {
        let done = counts.iter().zip(&failed).all(|(c, &f)| {
            c.errors >= scn.link.min_errors
                || c.bits >= scn.link.max_bits
                || (c.bits == 0 && f >= GIVE_UP_LEGS)
        });
        if leg > 0 && done {
            break;
        }
        let fail = |message: String| LegFailure {
            core_idx: core,
            rop_dbm: rop,
            leg,
            message,
        };
        let capture = receive(scn, &tx.fields[core], core, rop, leg)?;
        let synced = match sync_capture(scn, &capture, &symbols) {
            Ok(s) => s,
            Err(e) => {
                failures.push(fail(e.to_string()));
                failed.iter_mut().for_each(|f| *f += 1);
                continue;
            }
        };
        if want_eye && leg == 0 {
            eye = Some(eye_of(scn, &capture, &synced)?);
        }
        for ((c, f), eq) in counts.iter_mut().zip(failed.iter_mut()).zip(eqs) {
            match count_errors(&synced, &symbols, eq) {
                Ok(n) => *c = c.merged(&n),
                Err(e) => {
                    failures.push(fail(e.to_string()));
                    *f += 1;
                }
            }
        }
    }
    Ok(Point {
        core,
        rop,
        counts,
        failures,
        eye,
    })
}

/// Eye diagram of a capture, rotated so symbol centers sit at the start and
/// middle of the two-symbol window.
pub fn eye_of(scn: &Scenario, capture: &Waveform, synced: &Synced) -> Result<EyeDiagram> {
    let fine = resample(capture, EYE_SPS as f64 * scn.baud)?;
    let n = fine.len();
    let start =
        (synced.offset * EYE_SPS + synced.phase * EYE_SPS / mcfpam_core::rxdsp::SYNC_SPS) % n;
    let mut s = fine.samples().to_vec();
    s.rotate_left(start);
    // Start half a window early so the center sits mid-plot.
    s.rotate_right(EYE_SPS / 2);
    Ok(eye_diagram(
        &Waveform::new(s, fine.sample_rate())?,
        scn.baud,
        EYE_SPAN,
        EYE_BINS,
    )?)
}

fn max_rop(scn: &Scenario) -> f64 {
    scn.rop_sweep
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Characterizes the link, builds the per-core pre-equalizers from that
/// measurement, and transmits every core.
pub fn prepare(scn: &Scenario) -> Result<(Vec<FrequencyResponse>, Transmitted)> {
    let responses = characterize_link(scn)?;
    let preeqs = design_preequalizers(scn, &responses)?;
    let tx = transmit(scn, &preeqs)?;
    Ok((responses, tx))
}

/// Runs every (core, RoP) point of the scenario with its equalizer.
pub fn run_scenario(scn: &Scenario) -> Result<RunReport> {
    scn.validate()?;
    let (responses, tx) = prepare(scn)?;
    let top = max_rop(scn);
    let jobs: Vec<(usize, f64)> = scn
        .cores
        .iter()
        .flat_map(|&c| scn.rop_sweep.iter().map(move |&r| (c, r)))
        .collect();
    let points: Vec<Point> = jobs
        .par_iter()
        .map(|&(core, rop)| {
            measure_point(
                scn,
                &tx,
                core,
                rop,
                std::slice::from_ref(&scn.eq),
                rop == top,
            )
        })
        .collect::<Result<_>>()?;
    let mut report = RunReport {
        records: Vec::new(),
        failures: Vec::new(),
        eyes: Vec::new(),
        responses,
        clip_fraction: tx.clip_fraction.clone(),
        aggregate_bps: scn.aggregate_rate(),
    };
    for p in points {
        if p.counts[0].bits > 0 {
            report.records.push(BerRecord::new(
                p.core,
                p.rop,
                scn.baud,
                scn.eq.clone(),
                p.counts[0],
            ));
        }
        report.failures.extend(p.failures);
        if let Some(e) = p.eye {
            report.eyes.push((p.core, e));
        }
    }
    Ok(report)
}

/// BER charged to a point none of whose legs could be aligned (over 40% bit
/// errors): the error rate of random bits.
pub const UNALIGNABLE_BER: f64 = 0.5;

/// BER of one core at one RoP for several equalizers, per master seed:
/// `result[seed][eq]`. All equalizers see the same captures. An equalizer
/// with no countable leg for a seed is `None`.
pub fn compare_equalizers(
    scn: &Scenario,
    core: usize,
    rop: f64,
    eqs: &[EqConfig],
    seeds: &[u64],
) -> Result<Vec<Vec<Option<BerCount>>>> {
    scn.validate()?;
    let responses = characterize_link(scn)?;
    let preeqs = design_preequalizers(scn, &responses)?;
    seeds
        .iter()
        .map(|&seed| {
            let s = Scenario {
                master_seed: seed,
                ..scn.clone()
            };
            let tx = transmit(&s, &preeqs)?;
            let p = measure_point(&s, &tx, core, rop, eqs, false)?;
            Ok(p.counts
                .into_iter()
                .map(|c| (c.bits > 0).then_some(c))
                .collect())
        })
        .collect()
}

/// Equalizer families of the tap study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combo {
    FfOnly,
    FfFb,
    HalfSymFfFb,
}

impl Combo {
    pub const ALL: [Combo; 3] = [Combo::FfOnly, Combo::FfFb, Combo::HalfSymFfFb];

    pub fn label(self) -> &'static str {
        match self {
            Combo::FfOnly => "ff-only",
            Combo::FfFb => "ff+fb",
            Combo::HalfSymFfFb => "halfsym-ff+fb",
        }
    }

    /// Equalizer for a total tap budget. Feedback combos split the budget
    /// evenly with the odd tap going forward.
    pub fn config(self, total: usize, base: &EqConfig) -> EqConfig {
        let (ff, fb) = EqConfig::split_taps(total, self != Combo::FfOnly);
        let spacing = match self {
            Combo::HalfSymFfFb => Spacing::HalfSymbol,
            _ => Spacing::Symbol,
        };
        EqConfig {
            ff_taps: ff,
            fb_taps: fb,
            ff_spacing: spacing,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapRow {
    pub combo: Combo,
    pub taps: usize,
    pub eq: EqConfig,
    /// BER per seed, [`UNALIGNABLE_BER`] where no leg could be counted.
    pub bers: Vec<f64>,
}

impl TapRow {
    pub fn mean_ber(&self) -> f64 {
        self.bers.iter().sum::<f64>() / self.bers.len() as f64
    }
}

/// BER versus total taps for each combo on one core at one RoP.
pub fn sweep_taps(
    scn: &Scenario,
    core: usize,
    rop: f64,
    taps: &[usize],
    combos: &[Combo],
    seeds: &[u64],
) -> Result<Vec<TapRow>> {
    let mut rows: Vec<TapRow> = combos
        .iter()
        .flat_map(|&c| {
            taps.iter().map(move |&t| TapRow {
                combo: c,
                taps: t,
                eq: c.config(t, &scn.eq),
                bers: Vec::new(),
            })
        })
        .collect();
    let eqs: Vec<EqConfig> = rows.iter().map(|r| r.eq.clone()).collect();
    for per_seed in compare_equalizers(scn, core, rop, &eqs, seeds)? {
        for (row, c) in rows.iter_mut().zip(per_seed) {
            row.bers.push(c.map_or(UNALIGNABLE_BER, |c| c.ber()));
        }
    }
    Ok(rows)
}

/// BER-vs-RoP per core with HD-FEC and KP4 crossings.
#[derive(Debug, Clone)]
pub struct RopTable {
    pub report: RunReport,
    /// (core, 7% HD-FEC crossing, KP4 crossing), dBm.
    pub crossings: Vec<(usize, Option<f64>, Option<f64>)>,
}

pub fn sweep_rop(scn: &Scenario) -> Result<RopTable> {
    if scn.rop_sweep.len() < 3 {
        return Err(crate::BenchError::BadScenario(
            "a RoP sweep needs at least three points".into(),
        ));
    }
    let report = run_scenario(scn)?;
    let crossings = scn
        .cores
        .iter()
        .map(|&c| {
            let pts: Vec<(f64, f64, u64)> = report
                .records
                .iter()
                .filter(|r| r.core_idx == c)
                .map(|r| (r.rop_dbm, r.ber, r.bits_compared))
                .collect();
            (
                c,
                fec_crossing(&pts, mcfpam_core::rxdsp::FEC_7PCT_LIMIT),
                fec_crossing(&pts, mcfpam_core::rxdsp::FEC_KP4_LIMIT),
            )
        })
        .collect();
    Ok(RopTable { report, crossings })
}

/// Lowest RoP at which the waterfall drops through `limit`, interpolated
/// linearly in log10(BER) between the bracketing points. Points are
/// `(rop_dbm, ber, bits)`; an error-free point counts as BER 1/(2 bits).
pub fn fec_crossing(points: &[(f64, f64, u64)], limit: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(r, b, n)| (r, if b > 0.0 { b } else { 0.5 / n.max(1) as f64 }))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.first()?.1 <= limit {
        return None;
    }
    pts.windows(2)
        .find(|w| w[0].1 > limit && w[1].1 <= limit)
        .map(|w| {
            let (x0, y0) = (w[0].0, w[0].1.log10());
            let (x1, y1) = (w[1].0, w[1].1.log10());
            x0 + (limit.log10() - y0) * (x1 - x0) / (y1 - y0)
        })
}

/// One row of the notch table.
#[derive(Debug, Clone, PartialEq)]
pub struct NotchRow {
    pub d_total: f64,
    pub alpha_h: f64,
    /// Closed-form first null (transient chirp only), Hz.
    pub predicted: Option<f64>,
    /// First null of the simulated small-signal link, normalized to B2B.
    pub simulated: Option<Null>,
    /// Upper edge of the simulated search, Hz.
    pub searched_to: f64,
}

impl NotchRow {
    /// Simulated minus predicted, Hz.
    pub fn delta(&self) -> Option<f64> {
        Some(self.simulated?.freq - self.predicted?)
    }
}

/// Closed-form and simulated first nulls for each accumulated dispersion
/// (ps/nm). A zero entry is the B2B reference row.
pub fn notch_report(params: &VcselParams, d_totals: &[f64]) -> Result<Vec<NotchRow>> {
    d_totals
        .iter()
        .map(|&d| {
            let predicted = if d > 0.0 {
                Some(predict_notch(params.alpha_h, d, params.wavelength)?)
            } else {
                None
            };
            let searched_to = predicted.map_or(40e9, |p| (1.5 * p).max(40e9)).min(150e9);
            let simulated = if d > 0.0 {
                simulated_null(params, d, searched_to)?
            } else {
                let h = mcfpam_core::vcsel::link_response(params, 0.0, searched_to)?;
                h.first_null(NULL_MIN_DEPTH_DB)
            };
            Ok(NotchRow {
                d_total: d,
                alpha_h: params.alpha_h,
                predicted,
                simulated,
                searched_to,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_interpolates_in_log_ber() {
        let pts = [
            (-2.0, 1e-2, 1000000),
            (0.0, 1e-3, 1000000),
            (2.0, 1e-5, 1000000),
        ];
        let x = fec_crossing(&pts, 3.8e-3).unwrap();
        let want = -2.0 + (3.8e-3f64.log10() + 2.0) * 2.0 / (-3.0 + 2.0);
        assert!((x - want).abs() < 1e-12);
        assert!(fec_crossing(&pts, 1e-1).is_none());
        assert!(fec_crossing(&pts, 1e-7).is_none());
        let zero = [(0.0, 1e-3, 1000000), (1.0, 0.0, 1000000)];
        assert!(fec_crossing(&zero, 2.4e-4).unwrap() < 1.0);
    }

    #[test]
    fn zero_taps_reduce_to_bypass_for_all_combos() {
        let base = EqConfig::default();
        for c in Combo::ALL {
            assert!(c.config(0, &base).is_bypass());
        }
        assert_eq!(Combo::FfFb.config(7, &base).ff_taps, 4);
        assert_eq!(Combo::FfFb.config(7, &base).fb_taps, 3);
        assert_eq!(Combo::FfOnly.config(7, &base).ff_taps, 7);
    }

    #[test]
    fn notch_table_rows() {
        let p = VcselParams {
            alpha_h: 0.0,
            kappa: 0.0,
            ..VcselParams::default()
        };
        let rows = notch_report(&p, &[17.1, 0.0]).unwrap();
        assert!((rows[0].predicted.unwrap() - 60.4e9).abs() < 0.1e9);
        assert!(rows[0].delta().unwrap().abs() < 0.02 * 60.4e9);
        assert!(rows[1].predicted.is_none() && rows[1].simulated.is_none());
    }
}
