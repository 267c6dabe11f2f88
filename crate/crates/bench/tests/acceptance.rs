//! One test per acceptance criterion. Each prints a `criterion N ... PASS|FAIL`
//! line with the measured values before asserting, so the verdicts can be read
//! from `cargo test -- --nocapture` output even when a criterion fails.

use std::f64::consts::PI;

use mcfpam_bench::{
    compare_equalizers, notch_report, run_scenario, sweep_rop, Scenario, UNALIGNABLE_BER,
};
use mcfpam_core::fiberlink::{
    add_crosstalk, disperse, dispersion_phase, predict_notch, McfParams, RippleSpec,
};
use mcfpam_core::rxdsp::{count_ber, decide_and_demap, EqConfig, Spacing, FEC_7PCT_LIMIT};
use mcfpam_core::rxfe::{photodetect, RxNoise, RxParams};
use mcfpam_core::sigkit::{fft_forward, fft_inverse, OpticalField};
use mcfpam_core::txdsp::{
    demap_pam4, map_pam4, prbs15, pulse_shape_at_rate, quantize, PRBS15_PERIOD,
};
use mcfpam_core::vcsel::{calibrate_kappa, simulated_null, VcselParams};
use mcfpam_core::Complex64;

const LAMBDA: f64 = 1550e-9;
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Prints the verdict line and the measured values, then asserts.
fn verdict(n: u32, what: &str, checks: &[(&str, bool, String)]) {
    let ok = checks.iter().all(|c| c.1);
    println!(
        "criterion {n} ({what}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    for (name, pass, detail) in checks {
        println!("  [{}] {name}: {detail}", if *pass { "ok" } else { "FAIL" });
    }
    assert!(ok, "criterion {n} failed");
}

fn ghz(f: f64) -> String {
    format!("{:.3} GHz", f / 1e9)
}

fn random_field(n: usize, seed: u64) -> OpticalField {
    use rand::Rng;
    let mut rng = mcfpam_core::seed::rng(seed);
    let s = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 1e-2)
        .collect();
    OpticalField::new(s, 400e9, LAMBDA).unwrap()
}

/// The 1 km / 50 Gbaud preset reduced to the given RoPs.
fn one_km(rops: &[f64]) -> Scenario {
    let mut s = Scenario::preset("mcf1km_50g").unwrap();
    s.rop_sweep = rops.to_vec();
    s
}

fn fmt_ber(b: f64) -> String {
    if b == UNALIGNABLE_BER {
        "unalignable".into()
    } else {
        format!("{b:.2e}")
    }
}

/// Per-core BER at the single RoP of `scn`, indexed by core.
fn per_core_ber(scn: &Scenario) -> Vec<f64> {
    let r = run_scenario(scn).unwrap();
    let mut ber = vec![UNALIGNABLE_BER; scn.mcf.n_cores];
    for rec in &r.records {
        ber[rec.core_idx] = rec.ber;
    }
    ber
}

#[test]
fn criterion_01_closed_form_notches() {
    let f0 = predict_notch(0.0, 17.1, LAMBDA).unwrap();
    let f12 = predict_notch(12.0, 17.1, LAMBDA).unwrap();
    let mut checks = vec![
        ("alpha 0, 17.1 ps/nm", (f0 - 60.4e9).abs() <= 0.1e9, ghz(f0)),
        (
            "alpha 12, 17.1 ps/nm",
            (f12 - 13.9e9).abs() <= 0.1e9,
            ghz(f12),
        ),
    ];
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.5, 1.0, 3.0, 4.3, 12.0, 30.0] {
        let ratio = predict_notch(alpha, 12.0, LAMBDA).unwrap()
            / predict_notch(alpha, 17.1, LAMBDA).unwrap();
        worst = worst.max((ratio - 1.194).abs());
    }
    checks.push((
        "f(12)/f(17.1) = 1.194 for every alpha",
        worst <= 1e-3,
        format!("largest deviation {worst:.2e}"),
    ));
    let measured: f64 = 27.0 / 23.0;
    checks.push((
        "measured 27/23 GHz ratio within 3%",
        ((measured - 1.194) / 1.194).abs() <= 0.03,
        format!("{measured:.3}"),
    ));
    verdict(1, "closed-form notch", &checks);
}

#[test]
fn criterion_02_simulated_null_matches_closed_form() {
    let mut checks = Vec::new();
    for alpha in [0.0, 3.0, 12.0] {
        let p = VcselParams {
            alpha_h: alpha,
            kappa: 0.0,
            ..VcselParams::default()
        };
        for row in notch_report(&p, &[8.55, 17.1, 34.2]).unwrap() {
            let want = row.predicted.unwrap();
            let (ok, detail) = match row.simulated {
                Some(n) => {
                    let rel = (n.freq - want) / want;
                    (
                        rel.abs() <= 0.02,
                        format!("{} vs {} ({:+.2}%)", ghz(n.freq), ghz(want), 100.0 * rel),
                    )
                }
                None => (false, format!("no null below {}", ghz(row.searched_to))),
            };
            checks.push((
                if alpha == 0.0 {
                    "alpha 0"
                } else if alpha == 3.0 {
                    "alpha 3"
                } else {
                    "alpha 12"
                },
                ok,
                format!("{} ps/nm: {detail}", row.d_total),
            ));
        }
    }
    verdict(2, "simulator against closed form, kappa = 0", &checks);
}

#[test]
fn criterion_03_calibration_landmark() {
    // The calibration procedure on the default device (alpha_h = 12).
    let p = VcselParams::default();
    let mut checks = Vec::new();
    match calibrate_kappa(&p, 23e9, 17.1) {
        Ok(kappa) => {
            let cal = VcselParams { kappa, ..p };
            let n = simulated_null(&cal, 12.0, 60e9).unwrap();
            let ok = n.is_some_and(|n| (n.freq - 27e9).abs() <= 2.7e9);
            checks.push((
                "null at 12 ps/nm within 10% of 27 GHz",
                ok,
                format!("kappa {kappa:.4e}: {:?}", n.map(|n| ghz(n.freq))),
            ));
        }
        Err(e) => checks.push((
            "calibrate_kappa to 23 GHz at 17.1 ps/nm",
            false,
            e.to_string(),
        )),
    }
    // For reference: the joint (alpha_h, kappa) fit the link presets use.
    let shipped = Scenario::preset("mcf1km_50g").unwrap().vcsel;
    let at_17 = simulated_null(&shipped, 17.1, 60e9).unwrap().unwrap();
    let at_12 = simulated_null(&shipped, 12.0, 60e9).unwrap().unwrap();
    println!(
        "  preset chirp alpha {:.3}, kappa {:.3e}: null {} at 17.1 ps/nm, {} ({:+.1}% from 27 GHz) at 12 ps/nm",
        shipped.alpha_h,
        shipped.kappa,
        ghz(at_17.freq),
        ghz(at_12.freq),
        100.0 * (at_12.freq - 27e9) / 27e9
    );
    verdict(3, "calibration landmark", &checks);
}

#[test]
fn criterion_04_dispersion_and_dcm_exactness() {
    let x = random_field(4096, 4);
    let back = disperse(&disperse(&x, 171.0), -171.0);
    let err = back
        .samples()
        .iter()
        .zip(x.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / x.samples().iter().map(|s| s.norm()).fold(0.0, f64::max);
    let ten = McfParams {
        length: 10_000.0,
        dcm_dispersion: -159.0,
        ..McfParams::default()
    };
    let d = ten.total_dispersion();
    let theta_err = (1..=200)
        .map(|k| {
            let f = k as f64 * 0.5e9;
            let (a, b) = (
                dispersion_phase(d, LAMBDA, f),
                dispersion_phase(12.0, LAMBDA, f),
            );
            ((a - b) / b).abs()
        })
        .fold(0.0, f64::max);
    let virtual_km = d / ten.dispersion;
    verdict(
        4,
        "dispersion and DCM exactness",
        &[
            (
                "D then -D is the identity",
                err <= 1e-12,
                format!("max error {err:.2e}"),
            ),
            (
                "10 km + DCM phase equals 12 ps/nm",
                theta_err <= 1e-9,
                format!("relative {theta_err:.2e}"),
            ),
            (
                "virtual length 0.702 km +- 0.5%",
                ((virtual_km - 0.702) / 0.702).abs() <= 0.005,
                format!("{virtual_km:.4} km"),
            ),
        ],
    );
}

#[test]
fn criterion_05_equalizer_ordering() {
    let scn = one_km(&[7.0]);
    let eqs = [
        EqConfig::bypass(),
        EqConfig::with_taps(7, 0, Spacing::Symbol),
        EqConfig::with_taps(7, 7, Spacing::Symbol),
        EqConfig::with_taps(14, 7, Spacing::HalfSymbol),
    ];
    let counts = compare_equalizers(&scn, 0, 7.0, &eqs, &SEEDS).unwrap();
    let mean: Vec<f64> = (0..eqs.len())
        .map(|e| {
            let sum: f64 = counts
                .iter()
                .map(|c| c[e].map_or(UNALIGNABLE_BER, |c| c.ber()))
                .sum();
            sum / SEEDS.len() as f64
        })
        .collect();
    let show = |a: usize, b: usize| format!("{} vs {}", fmt_ber(mean[a]), fmt_ber(mean[b]));
    verdict(
        5,
        "equalizer ordering, 1 km 50 Gbaud core 0 at 7 dBm, 5 seeds",
        &[
            ("no-eq > 7FF", mean[0] > mean[1], show(0, 1)),
            ("7FF > 7FF+7FB", mean[1] > mean[2], show(1, 2)),
            ("14FF(T/2)+7FB <= 7FF+7FB", mean[3] <= mean[2], show(3, 2)),
        ],
    );
}

#[test]
fn criterion_06_fec_crossings() {
    let crossing = |name: &str, kp4: bool| {
        let t = sweep_rop(&Scenario::preset(name).unwrap()).unwrap();
        let (_, hd, k) = t.crossings[0];
        if kp4 {
            k
        } else {
            hd
        }
    };
    let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:+.2} dBm"));
    let hd70 = crossing("b2b_70g", false);
    let kp50 = crossing("b2b_50g", true);
    let km1 = per_core_ber(&one_km(&[7.0]));
    let mut ten = Scenario::preset("mcf10km_dcm_50g").unwrap();
    ten.rop_sweep = vec![7.0];
    assert_eq!((ten.eq.ff_taps, ten.eq.fb_taps), (3, 3));
    let km10 = per_core_ber(&ten);
    let list = |b: &[f64]| b.iter().map(|&v| fmt_ber(v)).collect::<Vec<_>>().join(" ");
    verdict(
        6,
        "FEC crossings and fiber links",
        &[
            (
                "B2B 70 Gbaud HD-FEC crossing 0 +- 1 dBm",
                hd70.is_some_and(|x| x.abs() <= 1.0),
                show(hd70),
            ),
            (
                "B2B 50 Gbaud KP4 crossing 1 +- 1 dBm",
                kp50.is_some_and(|x| (x - 1.0).abs() <= 1.0),
                show(kp50),
            ),
            (
                "1 km 50 Gbaud, every core <= 3.8e-3 at 7 dBm",
                km1.iter().all(|&b| b <= FEC_7PCT_LIMIT),
                list(&km1),
            ),
            (
                "10 km + DCM 50 Gbaud 3+3 taps, every core <= 3.8e-3 at 7 dBm",
                km10.iter().all(|&b| b <= FEC_7PCT_LIMIT),
                list(&km10),
            ),
        ],
    );
}

#[test]
fn criterion_07_aggregate_throughput() {
    let mut scn = one_km(&[7.0]);
    scn.cores = vec![0, 1, 2, 3, 4, 5, 6];
    let r = run_scenario(&scn).unwrap();
    // A core is counted when it was measured, whether or not it aligned.
    let measured: std::collections::BTreeSet<_> = r
        .records
        .iter()
        .map(|r| r.core_idx)
        .chain(r.failures.iter().map(|f| f.core_idx))
        .collect();
    let aligned: std::collections::BTreeSet<_> = r.records.iter().map(|r| r.core_idx).collect();
    let counted = measured.len();
    verdict(
        7,
        "throughput bookkeeping",
        &[
            (
                "aggregate 700 Gb/s",
                r.aggregate_bps == 700e9,
                format!("{:.1} Gb/s", r.aggregate_bps / 1e9),
            ),
            (
                "seven cores counted",
                counted == 7,
                format!("{counted} ({} with a BER record)", aligned.len()),
            ),
        ],
    );
}

#[test]
fn criterion_08_dsp_unit_properties() {
    let mut checks = Vec::new();

    // PRBS-15 period, balance and two-valued cyclic autocorrelation.
    let n = PRBS15_PERIOD;
    let seq = prbs15(0x7fff, 2 * n).unwrap();
    let periodic = seq[..n] == seq[n..];
    let minimal = [n / 7, n / 31, n / 151]
        .iter()
        .all(|&p| seq[..n - p] != seq[p..n]);
    let ones = seq[..n].iter().filter(|&&b| b == 1).count();
    let mut s: Vec<Complex64> = seq[..n]
        .iter()
        .map(|&b| Complex64::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    fft_forward(&mut s);
    for v in s.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    fft_inverse(&mut s);
    let auto_ok =
        (s[0].re - n as f64).abs() < 1e-6 && s[1..].iter().all(|v| (v.re + 1.0).abs() < 1e-6);
    checks.push((
        "PRBS-15 period 32767",
        periodic && minimal,
        format!("periodic {periodic}, minimal {minimal}"),
    ));
    checks.push(("PRBS-15 balance", ones == 16384, format!("{ones} ones")));
    checks.push((
        "PRBS-15 autocorrelation 32767 / -1",
        auto_ok,
        format!("peak {:.3}", s[0].re),
    ));

    // Raised-cosine pulse is ISI-free at the other symbol centers.
    let mut one = vec![0.0; 256];
    one[100] = 1.0;
    let w = pulse_shape_at_rate(&one, 50e9, 0.15, 200e9).unwrap();
    let isi = (0..256)
        .filter(|&k| k != 100)
        .map(|k| w.samples()[4 * k].abs())
        .fold(0.0, f64::max);
    checks.push((
        "raised-cosine ISI <= 1e-6",
        isi <= 1e-6,
        format!("{isi:.2e}"),
    ));

    // Gray mapping: adjacent levels differ in one bit, over all level pairs.
    let mut gray_ok = true;
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (demap_pam4(i), demap_pam4(j));
            let dist = (a.0 ^ b.0) + (a.1 ^ b.1);
            if i.abs_diff(j) == 1 && dist != 1 {
                gray_ok = false;
            }
            if i == j && map_pam4(&[a.0, a.1]).unwrap()[0] != [-3.0, -1.0, 1.0, 3.0][i] {
                gray_ok = false;
            }
        }
    }
    checks.push(("Gray adjacency", gray_ok, "all level pairs".into()));

    // 8-bit full-scale sine.
    let m = 200_000;
    let (mut sig, mut noise) = (0.0, 0.0);
    for k in 0..m {
        let x = (2.0 * PI * 0.123_456_7 * k as f64).sin();
        let q = quantize(x, 8, 1.0);
        sig += x * x;
        noise += (q - x) * (q - x);
    }
    let sqnr = 10.0 * (sig / noise).log10();
    checks.push((
        "8-bit SQNR 49.9 +- 1 dB",
        (sqnr - 49.9).abs() <= 1.0,
        format!("{sqnr:.2} dB"),
    ));

    // BER counter on planted errors, and invariance to cyclic rotation.
    let reference = prbs15(0x7fff, 2 * n).unwrap();
    let mut bits = reference.clone();
    let planted = [3usize, 999, 12_345, 40_000, 65_533];
    for &k in &planted {
        bits[k] ^= 1;
    }
    let c = count_ber(&bits, &reference).unwrap();
    checks.push((
        "planted errors counted exactly",
        c.errors == planted.len() as u64 && c.bits == 2 * n as u64,
        format!("{} / {}", c.errors, c.bits),
    ));
    let mut rotated = bits.clone();
    rotated.rotate_left(7777);
    let r = count_ber(&rotated, &reference).unwrap();
    checks.push((
        "rotation leaves the count unchanged",
        r.errors == c.errors,
        format!("{}", r.errors),
    ));
    let exact = decide_and_demap(&map_pam4(&reference).unwrap()) == reference;
    checks.push((
        "decisions on the grid return the bits",
        exact,
        String::new(),
    ));

    verdict(8, "DSP unit properties", &checks);
}

#[test]
fn criterion_09_physics_properties() {
    let mut checks = Vec::new();

    let x = random_field(8192, 9);
    let e = (disperse(&x, 171.0).energy() / x.energy() - 1.0).abs();
    checks.push(("dispersion keeps energy", e < 1e-9, format!("{e:.2e}")));

    use rand::Rng;
    let mut rng = mcfpam_core::seed::rng(90);
    let ph: Vec<Complex64> = (0..4096)
        .map(|_| Complex64::from_polar(1e-3f64.sqrt(), rng.random_range(-PI..PI)))
        .collect();
    let rx = RxParams {
        noise: RxNoise::off(),
        ..RxParams::default()
    };
    let i = photodetect(&OpticalField::new(ph, 400e9, LAMBDA).unwrap(), &rx, 0).unwrap();
    let mean = i.mean();
    let spread = i
        .samples()
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0, f64::max)
        / mean;
    checks.push((
        "square law is blind to phase",
        spread < 1e-9,
        format!("{spread:.2e} of mean"),
    ));

    // BER against RoP on every core of the 1 km link, mean over 5 seeds.
    let rops = [-2.0, 1.0, 4.0, 7.0];
    let mut sum = vec![vec![0.0; rops.len()]; 7];
    for seed in SEEDS {
        let mut s = one_km(&rops);
        s.master_seed = seed;
        let r = run_scenario(&s).unwrap();
        for (core, row) in sum.iter_mut().enumerate() {
            for (j, &rop) in rops.iter().enumerate() {
                let ber = r
                    .records
                    .iter()
                    .find(|rec| rec.core_idx == core && rec.rop_dbm == rop)
                    .map_or(UNALIGNABLE_BER, |rec| rec.ber);
                row[j] += ber / SEEDS.len() as f64;
            }
        }
    }
    for (core, row) in sum.iter().enumerate() {
        let mono = row.windows(2).all(|w| w[1] <= w[0]);
        let vals = row
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
            .join(" ");
        checks.push((
            "BER non-increasing in RoP",
            mono,
            format!("core {core} at {rops:?} dBm: {vals}"),
        ));
    }

    // Null depth over uncompensated length.
    let p = Scenario::preset("mcf1km_50g").unwrap().vcsel;
    let depths: Vec<(f64, Option<f64>, Option<f64>)> = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&km| {
            let n = simulated_null(&p, 17.1 * km, 60e9).unwrap();
            (km, n.map(|n| n.freq), n.map(|n| n.depth_db))
        })
        .collect();
    let deeper = depths.windows(2).all(|w| match (w[0].2, w[1].2) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    });
    let detail = depths
        .iter()
        .map(|(km, f, d)| match (f, d) {
            (Some(f), Some(d)) => format!("{km} km: {:.2} GHz {d:.1} dB", f / 1e9),
            _ => format!("{km} km: no null"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    checks.push(("null deepens with length", deeper, detail));

    verdict(9, "physics properties", &checks);
}

#[test]
fn criterion_10_crosstalk_scale() {
    let fiber_only = McfParams {
        length: 10_000.0,
        fanio_xt: f64::NEG_INFINITY,
        core_variation: RippleSpec::none(),
        ..McfParams::default()
    };
    let lit = OpticalField::new(
        vec![Complex64::new(1e-3f64.sqrt(), 0.0); 1024],
        400e9,
        LAMBDA,
    )
    .unwrap();
    let dark = lit.scaled(0.0);
    let mut fields = vec![dark; 7];
    fields[1] = lit.clone();
    let out = add_crosstalk(&fields, &fiber_only, 5).unwrap();
    let mut checks = Vec::new();
    for k in fiber_only.neighbors(1) {
        let db = 10.0 * (out[k].mean_power() / lit.mean_power()).log10();
        checks.push((
            "leakage -55 +- 0.2 dB",
            (db + 55.0).abs() <= 0.2,
            format!("core 1 -> core {k}: {db:.3} dB"),
        ));
    }

    let on = per_core_ber(&one_km(&[7.0]));
    let mut quiet = one_km(&[7.0]);
    quiet.mcf.xt_per_100km = f64::NEG_INFINITY;
    quiet.mcf.fanio_xt = f64::NEG_INFINITY;
    let off = per_core_ber(&quiet);
    for k in 0..7 {
        let rel = if on[k] == off[k] {
            0.0
        } else {
            (on[k] - off[k]).abs() / off[k]
        };
        checks.push((
            "crosstalk toggle changes 1 km BER < 10%",
            rel < 0.1,
            format!(
                "core {k}: {} with, {} without ({:+.1}%)",
                fmt_ber(on[k]),
                fmt_ber(off[k]),
                100.0 * rel
            ),
        ));
    }
    verdict(10, "crosstalk scale", &checks);
}
