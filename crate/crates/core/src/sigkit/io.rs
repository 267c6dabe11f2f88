//! Plain-text import and export of responses and waveforms.
//!
//! Frequency responses are three-column CSV: `freq_hz,gain_db,phase_rad`.
//! Waveforms are one sample per line after a `sample_rate_hz=<rate>` header.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FrequencyResponse, Result, SigError, Waveform};

#[derive(Serialize, Deserialize)]
struct ResponseRow {
    freq_hz: f64,
    gain_db: f64,
    phase_rad: f64,
}

fn parse_err(e: impl std::fmt::Display) -> SigError {
    SigError::Parse(e.to_string())
}

pub fn write_response_csv<W: Write>(h: &FrequencyResponse, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for (f, g) in h.freqs().iter().zip(h.gains()) {
        wr.serialize(ResponseRow {
            freq_hz: *f,
            gain_db: 20.0 * g.norm().log10(),
            phase_rad: g.arg(),
        })
        .map_err(parse_err)?;
    }
    wr.flush().map_err(parse_err)
}

pub fn read_response_csv<R: Read>(r: R) -> Result<FrequencyResponse> {
    let mut rd = csv::Reader::from_reader(r);
    let mut freqs = Vec::new();
    let mut gains = Vec::new();
    for row in rd.deserialize::<ResponseRow>() {
        let row = row.map_err(parse_err)?;
        freqs.push(row.freq_hz);
        gains.push(Complex64::from_polar(
            10f64.powf(row.gain_db / 20.0),
            row.phase_rad,
        ));
    }
    FrequencyResponse::new(freqs, gains)
}

pub fn write_waveform_csv<W: Write>(x: &Waveform, mut w: W) -> Result<()> {
    let io = |e: std::io::Error| parse_err(e);
    writeln!(w, "sample_rate_hz={:e}", x.sample_rate()).map_err(io)?;
    for s in x.samples() {
        writeln!(w, "{s:e}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_waveform_csv<R: BufRead>(r: R) -> Result<Waveform> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err("missing header line"))?
        .map_err(parse_err)?;
    let rate = header
        .trim()
        .strip_prefix("sample_rate_hz=")
        .ok_or_else(|| parse_err(format!("bad header `{header}`")))?
        .parse::<f64>()
        .map_err(parse_err)?;
    let mut samples = Vec::new();
    for line in lines {
        let line = line.map_err(parse_err)?;
        let t = line.trim();
        if !t.is_empty() {
            samples.push(t.parse::<f64>().map_err(parse_err)?);
        }
    }
    Waveform::new(samples, rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_csv_roundtrip() {
        let h = FrequencyResponse::new(
            vec![0.0, 1e9, 2e9],
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::from_polar(0.5, -0.3),
                Complex64::from_polar(0.01, 2.0),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_response_csv(&h, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("freq_hz,gain_db,phase_rad"));
        let back = read_response_csv(&buf[..]).unwrap();
        for (a, b) in back.gains().iter().zip(h.gains()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn waveform_csv_roundtrip() {
        let x = Waveform::new(vec![0.1, -0.35, 0.2], 92e9).unwrap();
        let mut buf = Vec::new();
        write_waveform_csv(&x, &mut buf).unwrap();
        let back = read_waveform_csv(&buf[..]).unwrap();
        assert_eq!(back, x);
        assert!(read_waveform_csv(&b"0.1\n0.2\n"[..]).is_err());
    }
}
