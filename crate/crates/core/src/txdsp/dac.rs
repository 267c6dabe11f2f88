use super::{Result, TxConfig, TxError};
use crate::sigkit::{filters, Filterable, FrequencyResponse, Waveform};

/// Symmetric mid-rise uniform quantizer with `2^bits` levels spanning exactly
/// `[-full_scale, full_scale]`. Inputs beyond full scale saturate.
pub fn quantize(x: f64, bits: u32, full_scale: f64) -> f64 {
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * full_scale / (levels - 1.0);
    let top = levels / 2.0 - 1.0;
    let idx = (x.abs() / step - 0.5).round().clamp(0.0, top);
    x.signum() * (idx + 0.5) * step
}

/// Scales `x` so its peak magnitude equals `full_scale`. An all-zero input is
/// returned unchanged.
pub fn normalize_to_full_scale(x: &Waveform, full_scale: f64) -> Waveform {
    let peak = x.peak_abs();
    if peak == 0.0 {
        x.clone()
    } else {
        x.scaled(full_scale / peak)
    }
}

/// Pre-equalizes the DAC-grid signal, normalizes it to the DAC full scale
/// (`drive_vpp / 2`), quantizes to `dac_bits`, and applies the 4th-order
/// Bessel analog band limit at `dac_bandwidth`.
pub fn apply_preeq_and_dac(
    x: &Waveform,
    preeq: &FrequencyResponse,
    cfg: &TxConfig,
) -> Result<Waveform> {
    if ((x.sample_rate() - cfg.dac_rate) / cfg.dac_rate).abs() > 1e-9 {
        return Err(TxError::BadConfig(format!(
            "signal at {:.4e} Sa/s is not on the {:.4e} Sa/s DAC grid",
            x.sample_rate(),
            cfg.dac_rate
        )));
    }
    let eq = x.filtered(preeq)?;
    let full = normalize_to_full_scale(&eq, cfg.full_scale());
    if full.peak_abs() == 0.0 {
        return Ok(full);
    }
    let q = full.map(|s| quantize(s, cfg.dac_bits, cfg.full_scale()));
    let bw = cfg.dac_bandwidth;
    Ok(q.filtered_by(|f| filters::bessel4(f, bw)))
}

/// The DAC stage without pre-equalization or full-scale normalization, used
/// for low-level channel probes: analog band limit only.
pub fn dac_analog(x: &Waveform, cfg: &TxConfig) -> Waveform {
    let bw = cfg.dac_bandwidth;
    x.filtered_by(|f| filters::bessel4(f, bw))
}
