//! Plot-ready CSV files and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mcfpam_core::rxdsp::{BerRecord, EyeDiagram};
use mcfpam_core::sigkit::io::write_response_csv;
use mcfpam_core::sigkit::FrequencyResponse;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::experiments::{NotchRow, RopTable, TapRow};
use crate::scenario::Scenario;
use crate::{BenchError, Result};

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Parse(e.to_string())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

#[derive(Serialize)]
struct RecordRow {
    core_idx: usize,
    rop_dbm: f64,
    baud: f64,
    ff_taps: usize,
    fb_taps: usize,
    ff_spacing: &'static str,
    bits_compared: u64,
    bit_errors: u64,
    ber: f64,
    fec_7pct_pass: bool,
    fec_kp4_pass: bool,
}

pub fn write_records(dir: &Path, records: &[BerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, "records.csv")?);
    for r in records {
        w.serialize(RecordRow {
            core_idx: r.core_idx,
            rop_dbm: r.rop_dbm,
            baud: r.baud,
            ff_taps: r.eq.ff_taps,
            fb_taps: r.eq.fb_taps,
            ff_spacing: r.eq.ff_spacing.label(),
            bits_compared: r.bits_compared,
            bit_errors: r.bit_errors,
            ber: r.ber,
            fec_7pct_pass: r.fec_7pct_pass,
            fec_kp4_pass: r.fec_kp4_pass,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `s21_core<k>.csv` for each listed core.
pub fn write_responses(dir: &Path, responses: &[FrequencyResponse], cores: &[usize]) -> Result<()> {
    for &k in cores {
        write_response_csv(&responses[k], create(dir, &format!("s21_core{k}.csv"))?)?;
    }
    Ok(())
}

pub fn write_eye(dir: &Path, core: usize, eye: &EyeDiagram) -> Result<()> {
    eye.write_csv(create(dir, &format!("eye_core{core}.csv"))?)?;
    Ok(())
}

#[derive(Serialize)]
struct CrossingRow {
    core_idx: usize,
    hdfec_crossing_dbm: Option<f64>,
    kp4_crossing_dbm: Option<f64>,
}

pub fn write_crossings(dir: &Path, table: &RopTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(dir, "crossings.csv")?);
    for &(core_idx, hd, kp4) in &table.crossings {
        w.serialize(CrossingRow {
            core_idx,
            hdfec_crossing_dbm: hd,
            kp4_crossing_dbm: kp4,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_taps(dir: &Path, rows: &[TapRow]) -> Result<()> {
    let mut w = create(dir, "taps.csv")?;
    writeln!(
        w,
        "combo,total_taps,ff_taps,fb_taps,ff_spacing,mean_ber,per_seed_ber"
    )?;
    for r in rows {
        let seeds: Vec<String> = r.bers.iter().map(|b| format!("{b:e}")).collect();
        writeln!(
            w,
            "{},{},{},{},{},{:e},{}",
            r.combo.label(),
            r.taps,
            r.eq.ff_taps,
            r.eq.fb_taps,
            r.eq.ff_spacing.label(),
            r.mean_ber(),
            seeds.join(";")
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_notches(dir: &Path, rows: &[NotchRow]) -> Result<()> {
    let mut w = create(dir, "notches.csv")?;
    writeln!(
        w,
        "d_total_ps_nm,alpha_h,predicted_hz,simulated_hz,simulated_depth_db,delta_hz,note"
    )?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
    for r in rows {
        let note = if r.simulated.is_none() {
            format!("no null below {:.0} GHz", r.searched_to / 1e9)
        } else {
            String::new()
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.d_total,
            r.alpha_h,
            opt(r.predicted),
            opt(r.simulated.map(|n| n.freq)),
            opt(r.simulated.map(|n| n.depth_db)),
            opt(r.delta()),
            note
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Hex SHA-256 of the scenario as written back to TOML.
pub fn scenario_hash(scn: &Scenario) -> Result<String> {
    let digest = Sha256::digest(scn.to_toml()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// `manifest`: what was run, on which scenario, with which seed and versions.
/// The full scenario follows the header so a run can be repeated from it.
pub fn write_manifest(dir: &Path, command: &str, scn: &Scenario) -> Result<()> {
    let mut w = create(dir, "manifest")?;
    writeln!(w, "# command: {command}")?;
    writeln!(w, "# scenario: {}", scn.name)?;
    writeln!(w, "# scenario_sha256: {}", scenario_hash(scn)?)?;
    writeln!(w, "# master_seed: {}", scn.master_seed)?;
    writeln!(w, "# n_symbols: {}", scn.n_symbols)?;
    writeln!(w, "# mcfpam_version: {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "{}", scn.to_toml()?)?;
    w.flush()?;
    Ok(())
}
