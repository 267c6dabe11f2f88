use serde::{Deserialize, Serialize};

use super::{Result, RxDspError};

/// Feed-forward tap spacing. Feedback taps are always symbol spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Symbol,
    HalfSymbol,
}

impl Spacing {
    pub fn label(self) -> &'static str {
        match self {
            Spacing::Symbol => "symbol",
            Spacing::HalfSymbol => "half-symbol",
        }
    }
}

/// What the equalizer does after the training symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqMode {
    TrainThenFreeze,
    DecisionDirected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EqConfig {
    pub ff_taps: usize,
    pub fb_taps: usize,
    pub ff_spacing: Spacing,
    pub step_mu: f64,
    pub train_len: usize,
    pub mode: EqMode,
}

impl Default for EqConfig {
    fn default() -> Self {
        Self {
            ff_taps: 7,
            fb_taps: 7,
            ff_spacing: Spacing::Symbol,
            step_mu: 1e-3,
            train_len: 4000,
            mode: EqMode::DecisionDirected,
        }
    }
}

impl EqConfig {
    /// No equalization: decisions on the normalized center samples.
    pub fn bypass() -> Self {
        Self {
            ff_taps: 0,
            fb_taps: 0,
            ..Self::default()
        }
    }

    pub fn with_taps(ff_taps: usize, fb_taps: usize, ff_spacing: Spacing) -> Self {
        Self {
            ff_taps,
            fb_taps,
            ff_spacing,
            ..Self::default()
        }
    }

    pub fn is_bypass(&self) -> bool {
        self.ff_taps == 0 && self.fb_taps == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_mu > 0.0 && self.step_mu < 1.0) {
            return Err(RxDspError::BadConfig(format!(
                "step_mu {} outside (0, 1)",
                self.step_mu
            )));
        }
        if self.train_len < 10 * (self.ff_taps + self.fb_taps) {
            return Err(RxDspError::BadConfig(format!(
                "train_len {} shorter than 10 x {} taps",
                self.train_len,
                self.ff_taps + self.fb_taps
            )));
        }
        Ok(())
    }

    /// Splits a total tap budget between feed-forward and feedback, rounding
    /// the feed-forward share up. With `feedback` off all taps go forward.
    pub fn split_taps(total: usize, feedback: bool) -> (usize, usize) {
        if feedback {
            (total.div_ceil(2), total / 2)
        } else {
            (total, 0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EqConfig::default().validate().is_ok());
        assert!(EqConfig::bypass().validate().is_ok());
        let bad_mu = EqConfig {
            step_mu: 1.5,
            ..EqConfig::default()
        };
        assert!(bad_mu.validate().is_err());
        let short = EqConfig {
            train_len: 100,
            ..EqConfig::default()
        };
        assert!(short.validate().is_err());
    }

    #[test]
    fn tap_split_rounds_forward_up() {
        assert_eq!(EqConfig::split_taps(0, true), (0, 0));
        assert_eq!(EqConfig::split_taps(7, true), (4, 3));
        assert_eq!(EqConfig::split_taps(14, true), (7, 7));
        assert_eq!(EqConfig::split_taps(5, false), (5, 0));
    }
}
