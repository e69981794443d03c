//! Fundamental-frequency estimation via the average phase advance with
//! Birkhoff weighting, and the FMA indicator: the frequency drift between the
//! two halves of an orbit.
//!
//! Frequencies are handled in radians per iteration throughout; exported
//! files convert to tunes (ν/2π) at the I/O boundary.

use crate::indicators::weighted_birkhoff_mean;
use crate::map::State;
use std::f64::consts::TAU;
use thiserror::Error;

/// Projection plane for phase extraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Horizontal,
    Vertical,
}

impl Plane {
    #[inline]
    fn coords(self, s: &State) -> (f64, f64) {
        match self {
            Plane::Horizontal => (s.x, s.px),
            Plane::Vertical => (s.y, s.py),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FreqError {
    #[error("phase undefined: point {index} has q = p = 0 in the {plane:?} plane")]
    PhaseUndefined { index: usize, plane: Plane },
    #[error("orbit too short: need at least {need} points, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("FMA needs an even number of points, got {0}")]
    OddLength(usize),
}

/// Phase angle of `(q, p)`: the argument of `q − i·p`, exact for the linear
/// rotation part near the origin.
#[inline]
pub fn phase(q: f64, p: f64) -> f64 {
    (-p).atan2(q)
}

/// Wrap a phase difference into `[0, 2π)`.
#[inline]
pub fn wrap_advance(delta: f64) -> f64 {
    let w = delta.rem_euclid(TAU);
    // rem_euclid can return 2π itself when delta is a tiny negative number.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Minimal circular distance between two angles, in `[0, π]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Wrapped phase advances `Δ_k = wrap(θ_{k+1} − θ_k)` along an orbit in the
/// chosen plane. Errors if any point sits exactly on the plane's origin.
pub fn phase_advances(orbit: &[State], plane: Plane) -> Result<Vec<f64>, FreqError> {
    if orbit.len() < 2 {
        return Err(FreqError::TooShort {
            need: 2,
            got: orbit.len(),
        });
    }
    let mut thetas = Vec::with_capacity(orbit.len());
    for (index, s) in orbit.iter().enumerate() {
        let (q, p) = plane.coords(s);
        if q == 0.0 && p == 0.0 {
            return Err(FreqError::PhaseUndefined { index, plane });
        }
        thetas.push(phase(q, p));
    }
    Ok(thetas
        .windows(2)
        .map(|w| wrap_advance(w[1] - w[0]))
        .collect())
}

/// Birkhoff-weighted fundamental frequency from a sequence of advances.
pub fn weighted_frequency(advances: &[f64]) -> f64 {
    weighted_birkhoff_mean(advances)
}

/// Both fundamental frequencies of an orbit segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyVector {
    pub nu_x: f64,
    pub nu_y: f64,
}

/// Fundamental frequencies (radians/iteration) of an orbit segment.
pub fn fundamental_frequencies(orbit: &[State]) -> Result<FrequencyVector, FreqError> {
    let nu_x = weighted_frequency(&phase_advances(orbit, Plane::Horizontal)?);
    let nu_y = weighted_frequency(&phase_advances(orbit, Plane::Vertical)?);
    Ok(FrequencyVector { nu_x, nu_y })
}

/// FMA indicator: Euclidean distance between the frequency vectors of the two
/// disjoint halves `[0, n)` and `[n, 2n)` of an orbit, each component taken
/// modulo 2π (minimal circular distance per plane).
pub fn fma(orbit: &[State]) -> Result<f64, FreqError> {
    if orbit.len() % 2 != 0 {
        return Err(FreqError::OddLength(orbit.len()));
    }
    if orbit.len() < 4 {
        return Err(FreqError::TooShort {
            need: 4,
            got: orbit.len(),
        });
    }
    let half = orbit.len() / 2;
    let first = fundamental_frequencies(&orbit[..half])?;
    let second = fundamental_frequencies(&orbit[half..])?;
    let dx = circular_distance(first.nu_x, second.nu_x);
    let dy = circular_distance(first.nu_y, second.nu_y);
    Ok((dx * dx + dy * dy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Pure-rotation orbit in both planes.
    fn rotation_orbit(omega_x: f64, omega_y: f64, n: usize, r: f64) -> Vec<State> {
        (0..n)
            .map(|k| {
                let ax = omega_x * k as f64;
                let ay = omega_y * k as f64;
                State::new(r * ax.cos(), -r * ax.sin(), r * ay.cos(), -r * ay.sin())
            })
            .collect()
    }

    #[test]
    fn advances_of_pure_rotation_are_constant() {
        let omega = 0.28 * TAU;
        let orbit = rotation_orbit(omega, 0.31 * TAU, 200, 0.1);
        let adv = phase_advances(&orbit, Plane::Horizontal).unwrap();
        for a in adv {
            assert!((a - omega).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_frequency_recovers_rotation() {
        let omega = 0.28 * TAU;
        let orbit = rotation_orbit(omega, 0.31 * TAU, 10_000, 0.1);
        let adv = phase_advances(&orbit, Plane::Horizontal).unwrap();
        let nu = weighted_frequency(&adv);
        assert!((nu - omega).abs() < 1e-12, "nu = {nu}");
    }

    #[test]
    fn alternating_advances_stay_wrapped() {
        // Points hopping back and forth on a circle: advances alternate
        // between ω and 2π−ω, each inside [0, 2π).
        let omega = 1.0f64;
        let orbit: Vec<State> = (0..50)
            .map(|k| {
                let a: f64 = if k % 2 == 0 { 0.0 } else { omega };
                State::new(a.cos(), -a.sin(), 0.3, 0.0)
            })
            .collect();
        let adv = phase_advances(&orbit, Plane::Horizontal).unwrap();
        for (k, a) in adv.iter().enumerate() {
            let expected = if k % 2 == 0 { omega } else { TAU - omega };
            assert!((a - expected).abs() < 1e-12);
            assert!((0.0..TAU).contains(a));
        }
    }

    #[test]
    fn phase_undefined_at_plane_origin() {
        let mut orbit = rotation_orbit(1.0, 0.7, 10, 0.1);
        orbit[3].y = 0.0;
        orbit[3].py = 0.0;
        assert_eq!(
            phase_advances(&orbit, Plane::Vertical).unwrap_err(),
            FreqError::PhaseUndefined {
                index: 3,
                plane: Plane::Vertical
            }
        );
    }

    #[test]
    fn fma_of_pure_rotation_vanishes() {
        for n in [4usize, 16, 100, 2000] {
            let orbit = rotation_orbit(0.28 * TAU, 0.31 * TAU, n, 0.1);
            let v = fma(&orbit).unwrap();
            assert!(v < 1e-12, "n = {n}: fma = {v}");
        }
    }

    #[test]
    fn fma_detects_constructed_drift() {
        // First half rotates with ω, second half with ω + δ.
        let omega = 1.3;
        let delta = 2.5e-3;
        let n = 500usize;
        let mut orbit = Vec::with_capacity(2 * n);
        let mut a = 0.0f64;
        for k in 0..2 * n {
            orbit.push(State::new(a.cos(), -a.sin(), (0.7 * k as f64).cos(), -(0.7 * k as f64).sin()));
            a += if k + 1 < n { omega } else { omega + delta };
        }
        // Keep the vertical plane identical across halves so only the
        // horizontal drift contributes.
        let v = fma(&orbit).unwrap();
        assert!((v - delta).abs() < 1e-9, "fma = {v} vs delta = {delta}");
    }

    #[test]
    fn fma_rejects_bad_lengths() {
        let orbit = rotation_orbit(1.0, 0.7, 3, 0.1);
        assert_eq!(fma(&orbit).unwrap_err(), FreqError::OddLength(3));
        let orbit = rotation_orbit(1.0, 0.7, 2, 0.1);
        assert_eq!(fma(&orbit).unwrap_err(), FreqError::TooShort { need: 4, got: 2 });
    }

    #[test]
    fn fma_symmetry_under_half_swap() {
        let orbit = {
            let mut o = rotation_orbit(1.1, 0.6, 400, 0.1);
            // Perturb the second half to create drift.
            for s in o.iter_mut().skip(200) {
                let r = (s.x * s.x + s.px * s.px).sqrt();
                let th = phase(s.x, s.px) * 1.001;
                s.x = r * th.cos();
                s.px = -r * th.sin();
            }
            o
        };
        let swapped: Vec<State> = orbit[200..]
            .iter()
            .chain(orbit[..200].iter())
            .copied()
            .collect();
        let a = fma(&orbit).unwrap();
        let b = fma(&swapped).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_contract(delta in -100.0f64..100.0) {
            let w = wrap_advance(delta);
            prop_assert!((0.0..TAU).contains(&w));
        }

        #[test]
        fn circular_distance_at_most_pi(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let d = circular_distance(a, b);
            prop_assert!((0.0..=std::f64::consts::PI).contains(&d));
            prop_assert!((circular_distance(b, a) - d).abs() < 1e-12);
        }

        #[test]
        fn weighted_frequency_of_constant_advances(omega in 0.01f64..6.0, n in 2usize..400) {
            let adv = vec![omega; n];
            let nu = weighted_frequency(&adv);
            prop_assert!((nu - omega).abs() < 1e-14);
        }
    }
}
