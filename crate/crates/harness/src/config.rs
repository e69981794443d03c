//! Experiment configuration: TOML file format, built-in scale presets, and
//! validation. A configuration file may be partial; its tables are merged
//! over the selected preset (or the `desk` defaults).

use crate::indicator::IndicatorId;
use henon_core::map::{Harmonic, MapParams, Modulation};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;
use thiserror::Error;

pub const PRESET_QUICK: &str = include_str!("../presets/quick.toml");
pub const PRESET_DESK: &str = include_str!("../presets/desk.toml");
pub const PRESET_PAPER: &str = include_str!("../presets/paper.toml");

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapSection {
    /// Base horizontal tune; omega_x0 = 2π·tune_x radians/iteration.
    pub tune_x: f64,
    /// Base vertical tune; omega_y0 = 2π·tune_y.
    pub tune_y: f64,
    /// Cubic (octupole) strength.
    pub mu: f64,
    /// Loss radius.
    pub r_c: f64,
    /// Overall modulation amplitude ε (0 disables modulation).
    pub epsilon: f64,
    /// Ripple harmonic amplitudes ε_k (parallel to `harmonic_tunes`).
    pub harmonic_amplitudes: Vec<f64>,
    /// Ripple harmonic tunes; Ω_k = 2π·harmonic_tunes[k].
    pub harmonic_tunes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunSection {
    /// Tracking horizon.
    pub n_max: u64,
    /// Seed recorded for sampled fixtures; the pipeline itself is
    /// deterministic.
    pub seed: u64,
    /// Indicators to compute (subset of le, fli, fli_wb, megno, gali4, rem,
    /// fma, bf).
    pub indicators: Vec<IndicatorId>,
    /// Performance-estimate window, inclusive.
    pub est_n_min: u64,
    pub est_n_max: u64,
    /// Explicit checkpoint ladder; merged with the estimate points when set.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    /// Frequency table mode: "auto", "on" or "off".
    #[serde(default = "default_freq_table")]
    pub freq_table: String,
}

fn default_freq_table() -> String {
    "auto".to_string()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassifySection {
    /// Bins of the exported histograms.
    pub histogram_bins: usize,
    /// Threshold perturbation for the sensitivity estimate (±fraction).
    pub sensitivity_delta: f64,
    /// "log-value": multiply the log-domain threshold by 1 ± δ;
    /// "linear-value": multiply the linear indicator value by 1 ± δ.
    pub sensitivity_mode: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub map: MapSection,
    pub grid: GridSection,
    pub run: RunSection,
    pub classify: ClassifySection,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown preset {0:?} (expected quick, desk or paper)")]
    UnknownPreset(String),
    #[error("map parameters invalid: {0}")]
    Map(#[from] henon_core::map::ParamError),
    #[error("harmonic_amplitudes and harmonic_tunes must have equal length ({0} vs {1})")]
    HarmonicMismatch(usize, usize),
    #[error("grid counts must be >= 1")]
    EmptyGrid,
    #[error("grid ranges must satisfy min <= max")]
    BadGridRange,
    #[error("n_max must be >= 100, got {0}")]
    NMaxTooSmall(u64),
    #[error("estimate window [{0}, {1}] must satisfy 10 <= lo < hi <= n_max")]
    BadEstimateWindow(u64, u64),
    #[error("no indicators selected")]
    NoIndicators,
    #[error("explicit checkpoints must be nonempty, sorted and <= n_max")]
    BadCheckpoints,
    #[error("freq_table must be one of auto, on, off; got {0:?}")]
    BadFreqTable(String),
    #[error("sensitivity_mode must be log-value or linear-value; got {0:?}")]
    BadSensitivityMode(String),
    #[error("sensitivity_delta must be in (0, 1), got {0}")]
    BadSensitivityDelta(f64),
    #[error("histogram_bins must be >= 1")]
    BadHistogramBins,
}

/// Deep-merge `overlay` into `base`: tables merge recursively, everything
/// else (including arrays) is replaced.
fn merge_toml(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_toml(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
        let text = match name {
            "quick" => PRESET_QUICK,
            "desk" => PRESET_DESK,
            "paper" => PRESET_PAPER,
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve a configuration: start from the preset (default `desk`),
    /// overlay the optional config file, validate.
    pub fn resolve(preset: Option<&str>, file: Option<&Path>) -> Result<ExperimentConfig, ConfigError> {
        let base_text = match preset.unwrap_or("desk") {
            "quick" => PRESET_QUICK,
            "desk" => PRESET_DESK,
            "paper" => PRESET_PAPER,
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        let mut value: toml::Value = toml::from_str(base_text).expect("presets are valid TOML");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let overlay: toml::Value = toml::from_str(&text)?;
            merge_toml(&mut value, overlay);
        }
        let cfg: ExperimentConfig = value.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a full config from TOML text (no preset base).
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.map;
        if m.harmonic_amplitudes.len() != m.harmonic_tunes.len() {
            return Err(ConfigError::HarmonicMismatch(
                m.harmonic_amplitudes.len(),
                m.harmonic_tunes.len(),
            ));
        }
        self.map_params().validate()?;
        let g = &self.grid;
        if g.nx < 1 || g.ny < 1 {
            return Err(ConfigError::EmptyGrid);
        }
        if !(g.x_min <= g.x_max && g.y_min <= g.y_max) {
            return Err(ConfigError::BadGridRange);
        }
        let r = &self.run;
        if r.n_max < 100 {
            return Err(ConfigError::NMaxTooSmall(r.n_max));
        }
        if !(10 <= r.est_n_min && r.est_n_min < r.est_n_max && r.est_n_max <= r.n_max) {
            return Err(ConfigError::BadEstimateWindow(r.est_n_min, r.est_n_max));
        }
        if r.indicators.is_empty() {
            return Err(ConfigError::NoIndicators);
        }
        if let Some(cps) = &r.checkpoints {
            if cps.is_empty()
                || !cps.windows(2).all(|w| w[0] < w[1])
                || *cps.last().unwrap() > r.n_max
                || cps[0] < 4
            {
                return Err(ConfigError::BadCheckpoints);
            }
        }
        match r.freq_table.as_str() {
            "auto" | "on" | "off" => {}
            other => return Err(ConfigError::BadFreqTable(other.to_string())),
        }
        let c = &self.classify;
        match c.sensitivity_mode.as_str() {
            "log-value" | "linear-value" => {}
            other => return Err(ConfigError::BadSensitivityMode(other.to_string())),
        }
        if !(c.sensitivity_delta > 0.0 && c.sensitivity_delta < 1.0) {
            return Err(ConfigError::BadSensitivityDelta(c.sensitivity_delta));
        }
        if c.histogram_bins < 1 {
            return Err(ConfigError::BadHistogramBins);
        }
        Ok(())
    }

    pub fn map_params(&self) -> MapParams {
        let m = &self.map;
        MapParams {
            omega_x0: TAU * m.tune_x,
            omega_y0: TAU * m.tune_y,
            mu: m.mu,
            modulation: Modulation {
                epsilon: m.epsilon,
                harmonics: m
                    .harmonic_amplitudes
                    .iter()
                    .zip(&m.harmonic_tunes)
                    .map(|(&amplitude, &tune)| Harmonic {
                        amplitude,
                        frequency: TAU * tune,
                    })
                    .collect(),
            },
            r_c: m.r_c,
        }
    }

    pub fn sensitivity_mode(&self) -> henon_core::classify::SensitivityMode {
        match self.classify.sensitivity_mode.as_str() {
            "linear-value" => henon_core::classify::SensitivityMode::LinearValue,
            _ => henon_core::classify::SensitivityMode::LogValue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in ["quick", "desk", "paper"] {
            let cfg = ExperimentConfig::preset(name).unwrap();
            assert_eq!(cfg.run.indicators.len(), 7);
            assert_eq!(cfg.map.harmonic_amplitudes.len(), 7);
        }
    }

    #[test]
    fn desk_preset_matches_expected_scale() {
        let cfg = ExperimentConfig::preset("desk").unwrap();
        assert_eq!((cfg.grid.nx, cfg.grid.ny), (100, 100));
        assert_eq!(cfg.run.n_max, 1_000_000);
        assert_eq!((cfg.run.est_n_min, cfg.run.est_n_max), (1_000, 100_000));
        assert_eq!(cfg.map.tune_x, 0.28);
    }

    #[test]
    fn ripple_harmonics_match_core_defaults() {
        let cfg = ExperimentConfig::preset("desk").unwrap();
        let params = cfg.map_params();
        let expected = henon_core::map::ripple_harmonics();
        assert_eq!(params.modulation.harmonics.len(), expected.len());
        for (a, b) in params.modulation.harmonics.iter().zip(&expected) {
            assert!((a.amplitude - b.amplitude).abs() < 1e-18);
            assert!((a.frequency - b.frequency).abs() < 1e-15);
        }
    }

    #[test]
    fn overlay_merges_partial_tables() {
        let dir = std::env::temp_dir().join("henon_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("case.toml");
        std::fs::write(&path, "[map]\nepsilon = 0.0\nmu = 0.0\n").unwrap();
        let cfg = ExperimentConfig::resolve(Some("quick"), Some(&path)).unwrap();
        assert_eq!(cfg.map.epsilon, 0.0);
        assert_eq!(cfg.map.mu, 0.0);
        // untouched fields come from the preset
        assert_eq!(cfg.map.tune_x, 0.28);
        assert_eq!(cfg.grid.nx, 50);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = ExperimentConfig::preset("quick").unwrap();
        cfg.run.est_n_max = cfg.run.n_max + 1;
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::BadEstimateWindow(_, _))
        ));
        let mut cfg = ExperimentConfig::preset("quick").unwrap();
        cfg.map.tune_x = 1.5; // omega > 2pi
        assert!(matches!(cfg.validate(), Err(ConfigError::Map(_))));
        let mut cfg = ExperimentConfig::preset("quick").unwrap();
        cfg.map.harmonic_amplitudes.pop();
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::HarmonicMismatch(_, _))
        ));
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(
            ExperimentConfig::resolve(Some("huge"), None),
            Err(ConfigError::UnknownPreset(_))
        ));
    }
}
