//! Ground truth, per-indicator classification reports, performance estimates
//! with threshold-sensitivity uncertainties, and histogram exports.

use crate::config::ExperimentConfig;
use crate::indicator::IndicatorId;
use crate::ladder::Ladder;
use crate::store::{GtRow, HistRow, ReportRow, SeriesRow};
use henon_core::classify::{
    build_ground_truth, classify_and_score, fallback_two_mode_threshold, mode_tree_threshold,
    performance_estimate, perturbed_thresholds, Label, SensitivityMode, ThresholdResult,
};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("ground truth failed: {0}")]
    Gt(#[from] henon_core::classify::GtError),
    #[error("no LE samples found at the ground-truth horizon n = {0}")]
    NoGtSamples(u64),
    #[error("series for {0} is missing checkpoint rows")]
    IncompleteSeries(IndicatorId),
}

/// Ground truth built from the LE store at the ladder horizon.
pub struct GroundTruth {
    pub horizon: u64,
    pub rows: Vec<GtRow>,
    pub threshold: ThresholdResult,
}

pub fn build_gt_from_le(le_series: &[SeriesRow], horizon: u64) -> Result<GroundTruth, ReportError> {
    let mut orbit_ids = Vec::new();
    let mut le_values = Vec::new();
    for row in le_series.iter().filter(|r| r.n == horizon) {
        if let Some(v) = row.value {
            orbit_ids.push(row.orbit_id);
            le_values.push(v);
        }
    }
    if le_values.is_empty() {
        return Err(ReportError::NoGtSamples(horizon));
    }
    let (labels, threshold) = build_ground_truth(&le_values, horizon)?;
    let rows = orbit_ids
        .into_iter()
        .zip(labels)
        .map(|(orbit_id, label)| GtRow { orbit_id, label })
        .collect();
    Ok(GroundTruth {
        horizon,
        rows,
        threshold,
    })
}

/// Classification artifacts of one indicator.
pub struct IndicatorReport {
    pub id: IndicatorId,
    pub rows: Vec<ReportRow>,
    /// Normalized accuracy integral over the estimate window, when every
    /// window checkpoint produced a threshold.
    pub estimate: Option<f64>,
    /// Half-range of the estimate under the ±delta threshold perturbation.
    pub sensitivity: Option<f64>,
}

/// Transformed samples of one checkpoint, GT-labeled.
struct CheckpointSamples {
    values: Vec<f64>,
    labels: Vec<Label>,
}

/// Per-checkpoint threshold for scoring: the strict mode-count detection
/// when the target modality has formed, otherwise the two-main-peaks
/// fallback (the accuracy then reflects how badly a premature threshold
/// classifies, which is what the accuracy-versus-n curves measure).
fn detect_threshold(id: IndicatorId, values: &[f64]) -> Option<f64> {
    if values.len() < 10 {
        return None;
    }
    if let Ok(r) = mode_tree_threshold(values, id.mode_target()) {
        if let Some(t) = r.threshold {
            return Some(t);
        }
    }
    fallback_two_mode_threshold(values).ok().and_then(|r| r.threshold)
}

fn collect_checkpoint_samples(
    id: IndicatorId,
    series: &[SeriesRow],
    gt: Option<&HashMap<u64, Label>>,
    ladder: &[u64],
) -> HashMap<u64, CheckpointSamples> {
    let mut by_n: HashMap<u64, CheckpointSamples> = ladder
        .iter()
        .map(|&n| {
            (
                n,
                CheckpointSamples {
                    values: Vec::new(),
                    labels: Vec::new(),
                },
            )
        })
        .collect();
    for row in series {
        let Some(value) = row.value else { continue };
        let label = match gt {
            Some(map) => match map.get(&row.orbit_id) {
                Some(&l) => Some(l),
                None => continue,
            },
            None => None,
        };
        if let Some(slot) = by_n.get_mut(&row.n) {
            slot.values.push(id.transform(value, row.n));
            if let Some(l) = label {
                slot.labels.push(l);
            }
        }
    }
    by_n
}

/// Score one indicator against the ground truth at every checkpoint.
pub fn classify_indicator(
    id: IndicatorId,
    series: &[SeriesRow],
    gt: &GroundTruth,
    ladder: &Ladder,
    cfg: &ExperimentConfig,
) -> IndicatorReport {
    let gt_map: HashMap<u64, Label> = gt.rows.iter().map(|r| (r.orbit_id, r.label)).collect();
    let samples = collect_checkpoint_samples(id, series, Some(&gt_map), &ladder.checkpoints);
    let orientation = id.orientation();
    let delta = cfg.classify.sensitivity_delta;
    let mode = cfg.sensitivity_mode();

    let mut rows = Vec::with_capacity(ladder.checkpoints.len());
    let mut threshold_by_n: HashMap<u64, f64> = HashMap::new();
    for &n in &ladder.checkpoints {
        let s = &samples[&n];
        let threshold = detect_threshold(id, &s.values);
        let row = match threshold {
            Some(t) => {
                threshold_by_n.insert(n, t);
                let counts = classify_and_score(&s.values, &s.labels, t, orientation);
                ReportRow {
                    n,
                    threshold: Some(t),
                    accuracy: Some(counts.accuracy()),
                    fp_rate: counts.fp_rate(),
                    fn_rate: counts.fn_rate(),
                }
            }
            None => ReportRow {
                n,
                threshold: None,
                accuracy: None,
                fp_rate: None,
                fn_rate: None,
            },
        };
        rows.push(row);
    }

    // Performance estimate over the window, plus its ±delta sensitivity.
    let est_accuracy =
        |perturb: Option<(f64, SensitivityMode, bool)>| -> Option<Vec<(f64, f64)>> {
            let mut pts = Vec::with_capacity(ladder.estimate_points.len());
            for &n in &ladder.estimate_points {
                let t = *threshold_by_n.get(&n)?;
                let t = match perturb {
                    None => t,
                    Some((delta, mode, low)) => {
                        let (lo, hi) = perturbed_thresholds(t, delta, mode);
                        if low {
                            lo
                        } else {
                            hi
                        }
                    }
                };
                let s = &samples[&n];
                let acc = classify_and_score(&s.values, &s.labels, t, orientation).accuracy();
                pts.push(((n as f64).log10(), acc));
            }
            Some(pts)
        };
    let estimate_of = |pts: &[(f64, f64)]| -> Option<f64> {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let accs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        performance_estimate(&xs, &accs).ok()
    };
    let estimate = est_accuracy(None).and_then(|pts| estimate_of(&pts));
    let sensitivity = match estimate {
        Some(nominal) => {
            let lo = est_accuracy(Some((delta, mode, true))).and_then(|p| estimate_of(&p));
            let hi = est_accuracy(Some((delta, mode, false))).and_then(|p| estimate_of(&p));
            match (lo, hi) {
                (Some(a), Some(b)) => {
                    let max = a.max(b).max(nominal);
                    let min = a.min(b).min(nominal);
                    Some(0.5 * (max - min))
                }
                _ => None,
            }
        }
        None => None,
    };
    IndicatorReport {
        id,
        rows,
        estimate,
        sensitivity,
    }
}

/// Histogram of the transformed samples at each requested checkpoint,
/// with the detected threshold attached (empty when detection failed).
/// Operates on every surviving orbit; no ground truth needed.
pub fn histogram_rows(
    id: IndicatorId,
    series: &[SeriesRow],
    ladder: &Ladder,
    at: &[u64],
    bins: usize,
) -> Vec<HistRow> {
    let samples = collect_checkpoint_samples(id, series, None, &ladder.checkpoints);
    let mut out = Vec::new();
    for &n in at {
        let Some(s) = samples.get(&n) else { continue };
        if s.values.is_empty() {
            continue;
        }
        let threshold = detect_threshold(id, &s.values);
        let lo = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in &s.values {
            let idx = if width > 0.0 {
                (((v - lo) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[idx] += 1;
        }
        for (k, &count) in counts.iter().enumerate() {
            out.push(HistRow {
                n,
                bin_left: lo + width * k as f64,
                bin_right: if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 },
                count,
                threshold,
            });
        }
    }
    out
}

/// The JSON summary: estimates, sensitivities and threshold curves keyed by
/// indicator, plus the GT description.
#[derive(Serialize)]
pub struct Summary {
    pub gt: GtSummary,
    pub estimate_window: [u64; 2],
    pub checkpoints: Vec<u64>,
    pub performance_estimates: BTreeMap<String, Option<f64>>,
    pub sensitivities: BTreeMap<String, Option<f64>>,
    pub thresholds: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Serialize)]
pub struct GtSummary {
    pub horizon: u64,
    pub threshold: f64,
    pub bandwidth: f64,
    pub mode_locations: Vec<f64>,
    pub regular: usize,
    pub chaotic: usize,
}

pub fn summarize(
    gt: &GroundTruth,
    reports: &[IndicatorReport],
    ladder: &Ladder,
    cfg: &ExperimentConfig,
) -> Summary {
    let mut performance_estimates = BTreeMap::new();
    let mut sensitivities = BTreeMap::new();
    let mut thresholds = BTreeMap::new();
    for r in reports {
        performance_estimates.insert(r.id.to_string(), r.estimate);
        sensitivities.insert(r.id.to_string(), r.sensitivity);
        let mut curve = BTreeMap::new();
        for row in &r.rows {
            if let Some(t) = row.threshold {
                curve.insert(format!("{:012}", row.n), t);
            }
        }
        thresholds.insert(r.id.to_string(), curve);
    }
    Summary {
        gt: GtSummary {
            horizon: gt.horizon,
            threshold: gt.threshold.threshold.unwrap_or(f64::NAN),
            bandwidth: gt.threshold.bandwidth.unwrap_or(f64::NAN),
            mode_locations: gt.threshold.mode_locations.clone(),
            regular: gt.rows.iter().filter(|r| r.label == Label::Regular).count(),
            chaotic: gt.rows.iter().filter(|r| r.label == Label::Chaotic).count(),
        },
        estimate_window: [cfg.run.est_n_min, cfg.run.est_n_max],
        checkpoints: ladder.checkpoints.clone(),
        performance_estimates,
        sensitivities,
        thresholds,
    }
}
