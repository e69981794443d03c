//! Checkpoint ladders: 50 log-spaced iteration counts from 100 to n_max plus
//! the 50 performance-estimate abscissae, merged and rounded to even so FMA
//! can split every checkpoint into equal halves.

use crate::config::ExperimentConfig;
use henon_core::classify::ESTIMATE_POINTS;

/// `count` log-spaced integers over `[lo, hi]` inclusive of both endpoints,
/// rounded down to even, deduplicated.
pub fn log_spaced_even(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    assert!(lo >= 4 && hi >= lo && count >= 2);
    let (llo, lhi) = ((lo as f64).log10(), (hi as f64).log10());
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let x = llo + (lhi - llo) * i as f64 / (count - 1) as f64;
            let n = 10f64.powf(x).round() as u64;
            (n.clamp(lo, hi)) & !1
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The checkpoint plan of a run.
#[derive(Clone, Debug)]
pub struct Ladder {
    /// All checkpoints, sorted, even, last one is the GT horizon.
    pub checkpoints: Vec<u64>,
    /// The 50 estimate abscissae (a subset of `checkpoints`).
    pub estimate_points: Vec<u64>,
}

impl Ladder {
    pub fn for_config(cfg: &ExperimentConfig) -> Ladder {
        let n_top = cfg.run.n_max & !1;
        let estimate_points = log_spaced_even(cfg.run.est_n_min.max(4), cfg.run.est_n_max, ESTIMATE_POINTS);
        let mut checkpoints = match &cfg.run.checkpoints {
            Some(explicit) => explicit.iter().map(|&n| n & !1).collect::<Vec<_>>(),
            None => log_spaced_even(100.min(n_top), n_top, 50),
        };
        checkpoints.extend_from_slice(&estimate_points);
        checkpoints.push(n_top);
        checkpoints.retain(|&n| n >= 4);
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Ladder {
            checkpoints,
            estimate_points,
        }
    }

    /// The iteration count the ground truth is built at.
    pub fn gt_horizon(&self) -> u64 {
        *self.checkpoints.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn estimate_points_are_fifty_distinct_and_even() {
        let pts = log_spaced_even(1000, 100_000, ESTIMATE_POINTS);
        assert_eq!(pts.len(), ESTIMATE_POINTS);
        assert!(pts.iter().all(|n| n % 2 == 0));
        assert_eq!(pts[0], 1000);
        assert_eq!(*pts.last().unwrap(), 100_000);
    }

    #[test]
    fn ladder_contains_estimate_points_and_horizon() {
        let cfg = ExperimentConfig::preset("desk").unwrap();
        let ladder = Ladder::for_config(&cfg);
        assert_eq!(ladder.gt_horizon(), 1_000_000);
        for p in &ladder.estimate_points {
            assert!(ladder.checkpoints.binary_search(p).is_ok());
        }
        assert!(ladder.checkpoints.windows(2).all(|w| w[0] < w[1]));
        assert!(ladder.checkpoints[0] >= 4);
    }

    #[test]
    fn explicit_checkpoints_are_merged_with_estimate_points() {
        let mut cfg = ExperimentConfig::preset("quick").unwrap();
        cfg.run.checkpoints = Some(vec![500, 5000, 50_000]);
        let ladder = Ladder::for_config(&cfg);
        assert!(ladder.checkpoints.contains(&500));
        assert_eq!(ladder.estimate_points.len(), ESTIMATE_POINTS);
        assert_eq!(ladder.gt_horizon(), 100_000);
    }
}
