//! Scenario files: one experiment grid plus every device parameter it uses.

use std::path::Path;

use mcfpam_core::fiberlink::McfParams;
use mcfpam_core::rxdsp::EqConfig;
use mcfpam_core::rxfe::RxParams;
use mcfpam_core::txdsp::{TxConfig, PRBS15_PERIOD};
use mcfpam_core::vcsel::VcselParams;
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

/// Link-level settings that are not a property of a single device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Optical power launched into each fan-in port, dBm. Set by the booster
    /// amplifier and splitter ahead of the fan-in.
    pub launch_dbm: f64,
    /// Cyclic PRBS offset between neighbouring cores, bits. Decorrelates the
    /// lanes so crosstalk does not add coherently.
    pub prbs_shift: usize,
    /// Optical simulation grid in samples per symbol.
    pub sim_sps: usize,
    /// A (core, RoP) point keeps adding legs until it has this many errors...
    pub min_errors: u64,
    /// ...or this many compared bits.
    pub max_bits: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            launch_dbm: 0.0,
            prbs_shift: 4682,
            sim_sps: 8,
            min_errors: 10,
            max_bits: 1_000_000,
        }
    }
}

fn default_symbols() -> usize {
    67_200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Symbol rate, baud. Overrides `tx.baud`.
    pub baud: f64,
    #[serde(default)]
    pub tx: TxConfig,
    #[serde(default)]
    pub vcsel: VcselParams,
    #[serde(default)]
    pub mcf: McfParams,
    #[serde(default)]
    pub rx: RxParams,
    #[serde(default)]
    pub eq: EqConfig,
    /// Received optical powers at the photodiode, dBm.
    pub rop_sweep: Vec<f64>,
    /// Cores that are received and counted. All cores are always lit.
    pub cores: Vec<usize>,
    #[serde(default = "default_symbols")]
    pub n_symbols: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub link: LinkConfig,
}

/// Preset scenario files compiled into the binary.
pub const PRESETS: [(&str, &str); 7] = [
    ("b2b_50g", include_str!("../presets/b2b_50g.toml")),
    ("b2b_56g", include_str!("../presets/b2b_56g.toml")),
    ("b2b_64g", include_str!("../presets/b2b_64g.toml")),
    ("b2b_70g", include_str!("../presets/b2b_70g.toml")),
    ("mcf1km_50g", include_str!("../presets/mcf1km_50g.toml")),
    ("mcf1km_56g", include_str!("../presets/mcf1km_56g.toml")),
    (
        "mcf10km_dcm_50g",
        include_str!("../presets/mcf10km_dcm_50g.toml"),
    ),
];

fn is_integral(x: f64) -> bool {
    (x - x.round()).abs() < 1e-6 * x.abs().max(1.0)
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| BenchError::Parse(e.to_string()))?;
        s.tx.baud = s.baud;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BenchError::Parse(e.to_string()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| BenchError::UnknownPreset(name.to_string()))
            .and_then(|(_, text)| Self::from_toml(text))
    }

    /// A preset name or the path of a scenario file.
    pub fn load(spec: &str) -> Result<Self> {
        if PRESETS.iter().any(|(n, _)| *n == spec) {
            return Self::preset(spec);
        }
        let text = std::fs::read_to_string(Path::new(spec))?;
        Self::from_toml(&text)
    }

    /// Samples per leg on the optical simulation grid.
    pub fn sim_rate(&self) -> f64 {
        self.link.sim_sps as f64 * self.baud
    }

    /// Duration of one leg, seconds.
    pub fn period(&self) -> f64 {
        self.n_symbols as f64 / self.baud
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::BadScenario(m));
        if !(self.baud > 0.0) {
            return bad(format!("baud must be positive, got {}", self.baud));
        }
        self.tx.validate()?;
        self.vcsel.validate()?;
        self.mcf.validate()?;
        self.rx.validate()?;
        self.eq.validate()?;
        if self.n_symbols < PRBS15_PERIOD {
            return bad(format!(
                "n_symbols {} is below one PRBS-15 period of bits ({PRBS15_PERIOD} symbols)",
                self.n_symbols
            ));
        }
        if self.eq.train_len >= self.n_symbols {
            return bad("training covers the whole capture".into());
        }
        if self.rop_sweep.is_empty() {
            return bad("rop_sweep is empty".into());
        }
        if self.rop_sweep.iter().any(|r| !r.is_finite()) {
            return bad("rop_sweep values must be finite".into());
        }
        if self.cores.is_empty() {
            return bad("no cores selected".into());
        }
        if let Some(c) = self.cores.iter().find(|&&c| c >= self.mcf.n_cores) {
            return bad(format!(
                "core {c} does not exist in a {}-core fiber",
                self.mcf.n_cores
            ));
        }
        if self.link.sim_sps < 2 || self.sim_rate() < 2.0 * self.rx.pd_bandwidth {
            return bad(format!(
                "optical grid {:.3e} Sa/s cannot carry the {:.3e} Hz photodiode band",
                self.sim_rate(),
                self.rx.pd_bandwidth
            ));
        }
        for (what, rate) in [("DAC", self.tx.dac_rate), ("ADC", self.rx.adc_rate)] {
            if !is_integral(self.n_symbols as f64 * rate / self.baud) {
                return bad(format!(
                    "{} symbols at {:.4e} Bd do not fill a whole number of {what} samples at {:.4e} Sa/s",
                    self.n_symbols, self.baud, rate
                ));
            }
        }
        if self.link.min_errors == 0 || self.link.max_bits == 0 {
            return bad("leg stopping rule needs positive limits".into());
        }
        if !self.link.launch_dbm.is_finite() {
            return bad("launch_dbm must be finite".into());
        }
        Ok(())
    }

    /// Aggregate line rate over the counted cores, bit/s (two bits per symbol).
    pub fn aggregate_rate(&self) -> f64 {
        self.cores.len() as f64 * self.baud * 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (name, _) in PRESETS {
            let s = Scenario::preset(name).unwrap();
            assert_eq!(s.name, name);
            assert_eq!(s.tx.baud, s.baud);
        }
    }

    #[test]
    fn round_trip_through_toml() {
        let s = Scenario::preset("mcf1km_50g").unwrap();
        let back = Scenario::from_toml(&s.to_toml().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut s = Scenario::preset("b2b_50g").unwrap();
        s.cores = vec![7];
        assert!(s.validate().is_err());
        let mut s = Scenario::preset("b2b_50g").unwrap();
        s.rop_sweep.clear();
        assert!(s.validate().is_err());
        let mut s = Scenario::preset("b2b_50g").unwrap();
        s.n_symbols = 30_000;
        assert!(s.validate().is_err());
        let mut s = Scenario::preset("b2b_50g").unwrap();
        s.n_symbols = 67_201;
        assert!(s.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_errors() {
        let text = "name='x'\nbaud=50e9\nrop_sweep=[0.0]\ncores=[0]\nbogus=1\n";
        assert!(Scenario::from_toml(text).is_err());
    }

    #[test]
    fn seven_cores_at_50g_carry_700g() {
        let mut s = Scenario::preset("mcf1km_50g").unwrap();
        s.cores = (0..7).collect();
        assert!((s.aggregate_rate() - 700e9).abs() < 1.0);
    }
}
