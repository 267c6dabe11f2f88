use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcfpam_bench::chain::{core_symbols, receive, sync_capture};
use mcfpam_bench::experiments::prepare;
use mcfpam_bench::{
    characterize_link, notch_report, output, run_scenario, sweep_rop, sweep_taps, Combo, Scenario,
};
use mcfpam_core::vcsel::VcselParams;

/// PAM-4 VCSEL / multicore-fiber link simulator.
#[derive(Parser)]
#[command(name = "mcfpam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Preset name or scenario file.
    scenario: String,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of symbols per leg.
    #[arg(long)]
    symbols: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> mcfpam_bench::Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        if let Some(seed) = self.seed {
            s.master_seed = seed;
        }
        if let Some(n) = self.symbols {
            s.n_symbols = n;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Measure the end-to-end response of every counted core.
    Characterize(Common),
    /// BER of every core at every RoP.
    Run(Common),
    /// BER-vs-RoP waterfalls with FEC crossings.
    SweepRop(Common),
    /// BER versus equalizer taps at one RoP on one core.
    SweepTaps {
        #[command(flatten)]
        common: Common,
        /// Received power, dBm. Defaults to the highest swept RoP.
        #[arg(long)]
        rop: Option<f64>,
        /// Core index. Defaults to the first counted core.
        #[arg(long)]
        core: Option<usize>,
        /// Largest total tap count.
        #[arg(long, default_value_t = 21)]
        max_taps: usize,
        /// Number of master seeds averaged, starting at the scenario seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Closed-form and simulated power-fading nulls.
    Notch {
        /// Linewidth enhancement factor. Defaults to the scenario value.
        #[arg(long)]
        alpha: Option<f64>,
        /// Accumulated dispersions, ps/nm.
        #[arg(long, value_delimiter = ',', required = true)]
        dispersion: Vec<f64>,
        /// Scenario whose VCSEL parameters are used; without one the chirp is
        /// transient only.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Eye diagram of one core at one RoP.
    Eye {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        core: usize,
        #[arg(long)]
        rop: f64,
    },
}

fn run(cli: Cli) -> mcfpam_bench::Result<()> {
    match cli.command {
        Command::Characterize(c) => {
            let s = c.load()?;
            let hs = characterize_link(&s)?;
            output::write_responses(&c.out, &hs, &s.cores)?;
            output::write_manifest(&c.out, "characterize", &s)?;
            for &k in &s.cores {
                match hs[k].first_null(10.0) {
                    Some(n) => println!(
                        "core {k}: first null {:.2} GHz at {:.1} dB",
                        n.freq / 1e9,
                        n.depth_db
                    ),
                    None => println!("core {k}: no null"),
                }
            }
        }
        Command::Run(c) => {
            let s = c.load()?;
            let r = run_scenario(&s)?;
            output::write_records(&c.out, &r.records)?;
            output::write_responses(&c.out, &r.responses, &s.cores)?;
            for (k, e) in &r.eyes {
                output::write_eye(&c.out, *k, e)?;
            }
            output::write_manifest(&c.out, "run", &s)?;
            print!("{}", r.summary());
        }
        Command::SweepRop(c) => {
            let s = c.load()?;
            let t = sweep_rop(&s)?;
            output::write_records(&c.out, &t.report.records)?;
            output::write_crossings(&c.out, &t)?;
            output::write_manifest(&c.out, "sweep-rop", &s)?;
            print!("{}", t.report.summary());
            let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:+.2} dBm"));
            for (k, hd, kp4) in &t.crossings {
                println!(
                    "core {k}: hd-fec crossing {}, kp4 crossing {}",
                    show(*hd),
                    show(*kp4)
                );
            }
        }
        Command::SweepTaps {
            common,
            rop,
            core,
            max_taps,
            seeds,
        } => {
            let s = common.load()?;
            let rop = rop.unwrap_or(
                s.rop_sweep
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max),
            );
            let core = core.unwrap_or(s.cores[0]);
            let taps: Vec<usize> = (0..=max_taps).collect();
            let seeds: Vec<u64> = (0..seeds).map(|k| s.master_seed + k).collect();
            let rows = sweep_taps(&s, core, rop, &taps, &Combo::ALL, &seeds)?;
            output::write_taps(&common.out, &rows)?;
            output::write_manifest(&common.out, "sweep-taps", &s)?;
            for r in &rows {
                println!(
                    "{:>14} {:>2} taps: {:.3e}",
                    r.combo.label(),
                    r.taps,
                    r.mean_ber()
                );
            }
        }
        Command::Notch {
            alpha,
            dispersion,
            scenario,
            out,
        } => {
            let mut p = match &scenario {
                Some(s) => Scenario::load(s)?.vcsel,
                None => VcselParams {
                    kappa: 0.0,
                    ..VcselParams::default()
                },
            };
            if let Some(a) = alpha {
                p.alpha_h = a;
            }
            let rows = notch_report(&p, &dispersion)?;
            output::write_notches(&out, &rows)?;
            for r in &rows {
                let ghz = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{:.2}", v / 1e9));
                println!(
                    "{:>7.2} ps/nm alpha {:>5.2}: predicted {} GHz, simulated {} GHz{}",
                    r.d_total,
                    r.alpha_h,
                    ghz(r.predicted),
                    ghz(r.simulated.map(|n| n.freq)),
                    r.simulated.map_or(
                        format!(" (no null below {:.0} GHz)", r.searched_to / 1e9),
                        |n| { format!(" at {:.1} dB", n.depth_db) }
                    )
                );
            }
        }
        Command::Eye { common, core, rop } => {
            let s = common.load()?;
            if core >= s.mcf.n_cores {
                return Err(mcfpam_bench::BenchError::BadScenario(format!(
                    "no core {core}"
                )));
            }
            let (_, tx) = prepare(&s)?;
            let capture = receive(&s, &tx.fields[core], core, rop, 0)?;
            let synced = sync_capture(&s, &capture, &core_symbols(&s, core))?;
            let eye = mcfpam_bench::experiments::eye_of(&s, &capture, &synced)?;
            output::write_eye(&common.out, core, &eye)?;
            output::write_manifest(&common.out, "eye", &s)?;
            println!("eye_core{core}.csv: {} samples", eye.total());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
