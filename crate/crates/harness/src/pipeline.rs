//! Stage orchestration over an output directory: each stage loads its inputs
//! from disk when present, computes them otherwise, and writes deterministic
//! artifacts.

use crate::config::ExperimentConfig;
use crate::indicator::IndicatorId;
use crate::ladder::Ladder;
use crate::report::{
    build_gt_from_le, classify_indicator, histogram_rows, summarize, GroundTruth, ReportError,
};
use crate::runner::{run_indicators, run_survival};
use crate::store::{self, GtRow, SeriesRow, StoreError, SurvivalRow};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("I/O error on {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("indicator {0} is not part of this run's configuration")]
    NotConfigured(IndicatorId),
}

pub struct Pipeline {
    pub cfg: ExperimentConfig,
    pub ladder: Ladder,
    pub out: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: ExperimentConfig, out: PathBuf) -> Pipeline {
        let ladder = Ladder::for_config(&cfg);
        Pipeline { cfg, ladder, out }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn survival_path(&self) -> PathBuf {
        self.path("survival.csv")
    }

    pub fn series_path(&self, id: IndicatorId) -> PathBuf {
        self.path(&format!("{id}.csv"))
    }

    pub fn gt_path(&self) -> PathBuf {
        self.path("gt.csv")
    }

    pub fn report_path(&self, id: IndicatorId) -> PathBuf {
        self.path(&format!("report_{id}.csv"))
    }

    pub fn histogram_path(&self, id: IndicatorId) -> PathBuf {
        self.path(&format!("hist_{id}.csv"))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.path("summary.json")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.path("manifest.json")
    }

    fn ensure_out_dir(&self) -> Result<(), PipelineError> {
        std::fs::create_dir_all(&self.out).map_err(|e| PipelineError::Io(self.out.clone(), e))
    }

    /// Load the survival table, computing and persisting it if absent.
    pub fn ensure_survival(&self) -> Result<Vec<SurvivalRow>, PipelineError> {
        self.ensure_out_dir()?;
        let path = self.survival_path();
        if path.exists() {
            return Ok(store::read_survival(&path)?);
        }
        let rows = run_survival(&self.cfg, &self.ladder);
        store::write_survival(&path, &rows)?;
        self.write_manifest(Some(&rows))?;
        Ok(rows)
    }

    /// Load one indicator's series, computing the whole indicator stage if
    /// any configured series file is absent.
    pub fn ensure_series(&self, id: IndicatorId) -> Result<Vec<SeriesRow>, PipelineError> {
        if !self.cfg.run.indicators.contains(&id) {
            return Err(PipelineError::NotConfigured(id));
        }
        let path = self.series_path(id);
        if !path.exists() {
            self.run_indicator_stage()?;
        }
        Ok(store::read_series(&path)?)
    }

    /// Compute and persist every configured indicator series.
    pub fn run_indicator_stage(&self) -> Result<(), PipelineError> {
        let survival = self.ensure_survival()?;
        let survivors: Vec<SurvivalRow> = survival.into_iter().filter(|r| r.survived).collect();
        let storeout = run_indicators(&self.cfg, &self.ladder, &survivors);
        for (id, rows) in storeout.indicators.iter().zip(&storeout.series) {
            store::write_series(&self.series_path(*id), rows)?;
        }
        Ok(())
    }

    /// The LE series used for the ground truth; computed on demand even when
    /// LE is not among the selected indicators.
    pub fn ensure_le_series(&self) -> Result<Vec<SeriesRow>, PipelineError> {
        if self.cfg.run.indicators.contains(&IndicatorId::Le) {
            return self.ensure_series(IndicatorId::Le);
        }
        let path = self.series_path(IndicatorId::Le);
        if !path.exists() {
            let survival = self.ensure_survival()?;
            let survivors: Vec<SurvivalRow> =
                survival.into_iter().filter(|r| r.survived).collect();
            let out = crate::runner::run_indicator_subset(
                &self.cfg,
                &self.ladder,
                &survivors,
                vec![IndicatorId::Le],
            );
            store::write_series(&path, &out.series[0])?;
        }
        Ok(store::read_series(&path)?)
    }

    /// Load the ground truth, building it from the LE store if absent.
    pub fn ensure_ground_truth(&self) -> Result<GroundTruth, PipelineError> {
        let gt_path = self.gt_path();
        let le = self.ensure_le_series()?;
        let gt = build_gt_from_le(&le, self.ladder.gt_horizon())?;
        if !gt_path.exists() {
            store::write_gt(&gt_path, &gt.rows)?;
        }
        Ok(gt)
    }

    /// Run classification for every configured indicator: report CSVs plus
    /// the JSON summary.
    pub fn run_classification(&self) -> Result<(), PipelineError> {
        let gt = self.ensure_ground_truth()?;
        let mut reports = Vec::new();
        for &id in &self.cfg.run.indicators {
            let series = self.ensure_series(id)?;
            let report = classify_indicator(id, &series, &gt, &self.ladder, &self.cfg);
            store::write_report(&self.report_path(id), &report.rows)?;
            reports.push(report);
        }
        let summary = summarize(&gt, &reports, &self.ladder, &self.cfg);
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
        std::fs::write(self.summary_path(), json.as_bytes())
            .map_err(|e| PipelineError::Io(self.summary_path(), e))?;
        Ok(())
    }

    /// Export histograms for the selected indicators at the given checkpoints
    /// (default: the full ladder).
    pub fn run_histograms(
        &self,
        ids: &[IndicatorId],
        at: Option<&[u64]>,
    ) -> Result<(), PipelineError> {
        let default_at = self.ladder.checkpoints.clone();
        let at = at.unwrap_or(&default_at);
        for &id in ids {
            let series = self.ensure_series(id)?;
            let rows = histogram_rows(
                id,
                &series,
                &self.ladder,
                at,
                self.cfg.classify.histogram_bins,
            );
            store::write_histogram(&self.histogram_path(id), &rows)?;
        }
        Ok(())
    }

    /// The whole pipeline: survival, indicators, ground truth, classification
    /// and histograms.
    pub fn run_report(&self) -> Result<(), PipelineError> {
        self.run_classification()?;
        self.run_histograms(&self.cfg.run.indicators.clone(), None)?;
        Ok(())
    }

    fn write_manifest(&self, survival: Option<&[SurvivalRow]>) -> Result<(), PipelineError> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            config: &'a ExperimentConfig,
            checkpoints: &'a [u64],
            estimate_points: &'a [u64],
            grid_orbits: usize,
            survivors: Option<usize>,
        }
        let manifest = Manifest {
            config: &self.cfg,
            checkpoints: &self.ladder.checkpoints,
            estimate_points: &self.ladder.estimate_points,
            grid_orbits: self.cfg.grid.nx * self.cfg.grid.ny,
            survivors: survival.map(|s| s.iter().filter(|r| r.survived).count()),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.manifest_path(), json.as_bytes())
            .map_err(|e| PipelineError::Io(self.manifest_path(), e))
    }
}

/// Ground-truth artifacts also persist the threshold description next to the
/// labels; kept in the pipeline so the CLI `ground-truth` subcommand has a
/// self-contained output.
#[derive(Serialize)]
pub struct GtJson {
    pub horizon: u64,
    pub threshold: Option<f64>,
    pub bandwidth: Option<f64>,
    pub mode_locations: Vec<f64>,
    pub regular: usize,
    pub chaotic: usize,
}

impl Pipeline {
    pub fn write_gt_json(&self, gt: &GroundTruth) -> Result<(), PipelineError> {
        let path = self.path("gt.json");
        let doc = GtJson {
            horizon: gt.horizon,
            threshold: gt.threshold.threshold,
            bandwidth: gt.threshold.bandwidth,
            mode_locations: gt.threshold.mode_locations.clone(),
            regular: gt
                .rows
                .iter()
                .filter(|r| r.label == henon_core::classify::Label::Regular)
                .count(),
            chaotic: gt
                .rows
                .iter()
                .filter(|r| r.label == henon_core::classify::Label::Chaotic)
                .count(),
        };
        let json = serde_json::to_string_pretty(&doc).expect("gt json serializes");
        std::fs::write(&path, json.as_bytes()).map_err(|e| PipelineError::Io(path, e))
    }
}

/// Convenience used by tests: read gt rows back.
pub fn read_gt_rows(path: &Path) -> Result<Vec<GtRow>, StoreError> {
    store::read_gt(path)
}
