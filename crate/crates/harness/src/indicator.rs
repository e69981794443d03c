//! Indicator identities: names used in files and CLI flags, classification
//! orientation, mode-count rule, and the log-domain transform applied before
//! thresholding.

use henon_core::classify::{ModeTarget, Orientation};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Floor for log10 of values that underflow to zero (e.g. FLI of the exact
/// fixed point); keeps transformed samples finite.
pub const LOG_FLOOR: f64 = -300.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorId {
    /// Lyapunov error, classified on log10(log10(LE)/n).
    Le,
    /// Fast Lyapunov Indicator along x̂, classified on log10(FLI/n).
    Fli,
    /// Birkhoff-weighted FLI, classified on log10(FLI^WB).
    FliWb,
    /// MEGNO filter of LE, classified on log10(MEGNO/n).
    Megno,
    /// GALI of order 4, classified on log10(GALI).
    Gali4,
    /// Reversibility error method, classified on log10(REM).
    Rem,
    /// Frequency map analysis, classified on log10(FMA).
    Fma,
    /// Forward-backward reversibility error (not part of the default set),
    /// classified like LE.
    Bf,
}

impl IndicatorId {
    pub const ALL: [IndicatorId; 8] = [
        IndicatorId::Le,
        IndicatorId::Fli,
        IndicatorId::FliWb,
        IndicatorId::Megno,
        IndicatorId::Gali4,
        IndicatorId::Rem,
        IndicatorId::Fma,
        IndicatorId::Bf,
    ];

    /// The seven indicators of the standard comparison.
    pub fn default_set() -> Vec<IndicatorId> {
        vec![
            IndicatorId::Le,
            IndicatorId::Fli,
            IndicatorId::FliWb,
            IndicatorId::Megno,
            IndicatorId::Gali4,
            IndicatorId::Rem,
            IndicatorId::Fma,
        ]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IndicatorId::Le => "le",
            IndicatorId::Fli => "fli",
            IndicatorId::FliWb => "fli_wb",
            IndicatorId::Megno => "megno",
            IndicatorId::Gali4 => "gali4",
            IndicatorId::Rem => "rem",
            IndicatorId::Fma => "fma",
            IndicatorId::Bf => "bf",
        }
    }

    /// Which side of the threshold is regular: GALI stays near 1 on regular
    /// orbits and collapses for chaos; every other indicator grows with
    /// chaos.
    pub fn orientation(self) -> Orientation {
        match self {
            IndicatorId::Gali4 => Orientation::HigherIsRegular,
            _ => Orientation::LowerIsRegular,
        }
    }

    /// FMA develops a trimodal distribution; all others are thresholded on
    /// two modes.
    pub fn mode_target(self) -> ModeTarget {
        match self {
            IndicatorId::Fma => ModeTarget::Three,
            _ => ModeTarget::Two,
        }
    }

    /// Log-domain transform applied to the raw stored value before
    /// thresholding, at checkpoint iteration count `n`.
    pub fn transform(self, value: f64, n: u64) -> f64 {
        match self {
            IndicatorId::Le | IndicatorId::Bf => log10_floor(value.log10() / n as f64),
            IndicatorId::Fli | IndicatorId::Megno => log10_floor(value.abs() / n as f64),
            IndicatorId::FliWb => log10_floor(value.abs()),
            IndicatorId::Gali4 | IndicatorId::Rem | IndicatorId::Fma => log10_floor(value),
        }
    }
}

fn log10_floor(v: f64) -> f64 {
    if v > 0.0 {
        v.log10().max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

impl fmt::Display for IndicatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown indicator id {0:?} (expected one of le, fli, fli_wb, megno, gali4, rem, fma, bf)")]
pub struct UnknownIndicator(pub String);

impl FromStr for IndicatorId {
    type Err = UnknownIndicator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IndicatorId::ALL
            .iter()
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| UnknownIndicator(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_names() {
        for id in IndicatorId::ALL {
            assert_eq!(id.as_str().parse::<IndicatorId>().unwrap(), id);
        }
        assert!("nope".parse::<IndicatorId>().is_err());
    }

    #[test]
    fn transforms_are_finite_on_edge_values() {
        for id in IndicatorId::ALL {
            for v in [0.0, 1.0, 1e-320, f64::MIN_POSITIVE, 2.0, 1e154] {
                let t = id.transform(v, 1000);
                assert!(t.is_finite(), "{id} transform of {v}");
            }
        }
    }

    #[test]
    fn le_transform_matches_double_log() {
        let v = IndicatorId::Le.transform(1e12, 100_000);
        assert!((v - (12.0f64 / 1e5).log10()).abs() < 1e-12);
    }

    #[test]
    fn gali_orientation_is_flipped() {
        assert_eq!(IndicatorId::Gali4.orientation(), Orientation::HigherIsRegular);
        assert_eq!(IndicatorId::Rem.orientation(), Orientation::LowerIsRegular);
    }
}
