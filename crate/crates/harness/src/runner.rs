//! Parallel execution of the survival and indicator stages. Orbits are
//! independent work units; results are collected in orbit-id order, so the
//! outputs are byte-identical for any worker count.

use crate::config::ExperimentConfig;
use crate::engine::{run_orbit, EngineSetup, OrbitSeries};
use crate::indicator::IndicatorId;
use crate::ladder::Ladder;
use crate::store::{SeriesRow, SurvivalRow};
use crate::tables::{FreqSource, WeightTables};
use henon_core::map::{track_orbit_with, State};
use rayon::prelude::*;

/// One grid initial condition. Orbit ids are row-major: `iy * nx + ix`.
#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub orbit_id: u64,
    pub x: f64,
    pub y: f64,
}

impl GridPoint {
    pub fn state(&self) -> State {
        State::new(self.x, 0.0, self.y, 0.0)
    }
}

/// Enumerate the uniform Cartesian grid (p_x = p_y = 0), row-major in y.
pub fn grid_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let g = &cfg.grid;
    let step = |lo: f64, hi: f64, count: usize, i: usize| {
        if count <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (count - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(g.nx * g.ny);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            out.push(GridPoint {
                orbit_id: (iy * g.nx + ix) as u64,
                x: step(g.x_min, g.x_max, g.nx, ix),
                y: step(g.y_min, g.y_max, g.ny, iy),
            });
        }
    }
    out
}

/// Track every grid point to the ladder horizon and record survival.
pub fn run_survival(cfg: &ExperimentConfig, ladder: &Ladder) -> Vec<SurvivalRow> {
    let params = cfg.map_params();
    let horizon = ladder.gt_horizon();
    let rots = FreqSource::build(&params, horizon, &cfg.run.freq_table);
    grid_points(cfg)
        .par_iter()
        .map(|pt| {
            let out = track_orbit_with(pt.state(), &params, &rots, horizon, &[], false);
            SurvivalRow {
                orbit_id: pt.orbit_id,
                x: pt.x,
                y: pt.y,
                survived: out.survived,
                n_stab: out.n_stab,
            }
        })
        .collect()
}

/// Per-indicator series for every surviving orbit, sorted by (orbit, n).
pub struct IndicatorStore {
    pub indicators: Vec<IndicatorId>,
    pub series: Vec<Vec<SeriesRow>>,
}

/// Run the indicator engine over all survivors for the configured set.
pub fn run_indicators(
    cfg: &ExperimentConfig,
    ladder: &Ladder,
    survivors: &[SurvivalRow],
) -> IndicatorStore {
    run_indicator_subset(cfg, ladder, survivors, cfg.run.indicators.clone())
}

/// Run the indicator engine over all survivors for an explicit subset (used
/// when the ground truth needs LE outside the configured selection).
pub fn run_indicator_subset(
    cfg: &ExperimentConfig,
    ladder: &Ladder,
    survivors: &[SurvivalRow],
    indicators: Vec<IndicatorId>,
) -> IndicatorStore {
    let params = cfg.map_params();
    let horizon = ladder.gt_horizon();
    let rots = FreqSource::build(&params, horizon, &cfg.run.freq_table);
    let need_fli_wb = indicators.contains(&IndicatorId::FliWb);
    let need_fma = indicators.contains(&IndicatorId::Fma);
    let weights = WeightTables::build(ladder, need_fli_wb, need_fma);
    let setup = EngineSetup {
        params: &params,
        rots: &rots,
        ladder: &ladder.checkpoints,
        indicators: &indicators,
        weights: &weights,
    };
    let per_orbit: Vec<OrbitSeries> = survivors
        .par_iter()
        .map(|row| run_orbit(State::new(row.x, 0.0, row.y, 0.0), &setup))
        .collect();

    let rows_per_ind = survivors.len() * ladder.checkpoints.len();
    let mut series: Vec<Vec<SeriesRow>> = indicators
        .iter()
        .map(|_| Vec::with_capacity(rows_per_ind))
        .collect();
    for (surv, orbit_series) in survivors.iter().zip(&per_orbit) {
        for (cp_idx, &n) in ladder.checkpoints.iter().enumerate() {
            for (ind_idx, value) in orbit_series[cp_idx].iter().enumerate() {
                series[ind_idx].push(SeriesRow {
                    orbit_id: surv.orbit_id,
                    n,
                    value: value.value.is_finite().then_some(value.value),
                    flag: value.flag,
                });
            }
        }
    }
    // Sort by (orbit, n): already produced per orbit in ladder order and the
    // survivors arrive sorted, so this is a no-op kept as a guarantee.
    for s in &mut series {
        s.sort_by_key(|r| (r.orbit_id, r.n));
    }
    IndicatorStore { indicators, series }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset("quick").unwrap();
        cfg.grid.nx = 6;
        cfg.grid.ny = 6;
        cfg.grid.x_max = 0.5;
        cfg.grid.y_max = 0.5;
        cfg.run.n_max = 2000;
        cfg.run.est_n_min = 100;
        cfg.run.est_n_max = 1000;
        cfg
    }

    #[test]
    fn grid_is_row_major_with_endpoint_inclusion() {
        let cfg = tiny_cfg();
        let pts = grid_points(&cfg);
        assert_eq!(pts.len(), 36);
        assert_eq!(pts[0].orbit_id, 0);
        assert_eq!((pts[0].x, pts[0].y), (0.0, 0.0));
        assert_eq!((pts[5].x, pts[5].y), (0.5, 0.0));
        assert_eq!((pts[30].x, pts[30].y), (0.0, 0.5));
        assert_eq!(pts[35].orbit_id, 35);
        assert_eq!((pts[35].x, pts[35].y), (0.5, 0.5));
    }

    #[test]
    fn single_point_grid_sits_at_min() {
        let mut cfg = tiny_cfg();
        cfg.grid.nx = 1;
        cfg.grid.ny = 1;
        cfg.grid.x_min = 0.05;
        cfg.grid.x_max = 0.05;
        cfg.grid.y_min = 0.1;
        cfg.grid.y_max = 0.1;
        let pts = grid_points(&cfg);
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].x, pts[0].y), (0.05, 0.1));
    }

    #[test]
    fn survival_origin_survives_far_points_lost() {
        let mut cfg = tiny_cfg();
        cfg.grid.x_max = 3.0;
        cfg.grid.y_max = 3.0;
        let ladder = Ladder::for_config(&cfg);
        let rows = run_survival(&cfg, &ladder);
        assert_eq!(rows.len(), 36);
        assert!(rows[0].survived, "origin must survive");
        let lost: Vec<_> = rows.iter().filter(|r| !r.survived).collect();
        assert!(!lost.is_empty());
        for r in lost {
            assert!(r.n_stab.unwrap() >= 1);
        }
    }

    #[test]
    fn indicator_store_is_complete_and_ordered() {
        let cfg = tiny_cfg();
        let ladder = Ladder::for_config(&cfg);
        let survival = run_survival(&cfg, &ladder);
        let survivors: Vec<SurvivalRow> =
            survival.into_iter().filter(|r| r.survived).collect();
        assert!(survivors.len() > 10);
        let store = run_indicators(&cfg, &ladder, &survivors);
        assert_eq!(store.indicators.len(), 7);
        for rows in &store.series {
            assert_eq!(rows.len(), survivors.len() * ladder.checkpoints.len());
            assert!(rows.windows(2).all(|w| (w[0].orbit_id, w[0].n) < (w[1].orbit_id, w[1].n)));
        }
    }
}
