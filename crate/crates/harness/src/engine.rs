//! Per-orbit indicator engine: a single forward pass that co-propagates the
//! tangent map and a renormalized deviation vector, streams phase advances and
//! Birkhoff-weighted window sums for every checkpoint, and forks backward
//! passes for REM. Only running sums are retained; the orbit itself is never
//! stored.
//!
//! A serial re-run of this engine on one orbit reproduces any parallel run
//! bit-for-bit, and the windowed sums match the slice-based operations in
//! `henon_core::freq`/`indicators` exactly (same weights, same summation
//! order).

use crate::indicator::IndicatorId;
use crate::tables::{FreqSource, WeightTables};
use henon_core::indicators::{
    gali4, le_squared, rem_return_defect, DeviationTracker, MegnoAccumulator, GALI_FLOOR,
};
use henon_core::map::{forward_step_rot, propagate_tangent, MapParams, RotationSource, State};
use henon_core::stats::KahanSum;
use nalgebra::{Matrix4, Vector4};

/// Status of one stored indicator value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueFlag {
    Ok,
    /// Frozen at the last finite value after numerical saturation.
    Saturated,
    /// Not computable at this checkpoint (lost backward pass, undefined
    /// phase); the value field is empty in stores.
    Unavailable,
}

impl ValueFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueFlag::Ok => "ok",
            ValueFlag::Saturated => "saturated",
            ValueFlag::Unavailable => "unavailable",
        }
    }

    pub fn parse(s: &str) -> Option<ValueFlag> {
        match s {
            "ok" => Some(ValueFlag::Ok),
            "saturated" => Some(ValueFlag::Saturated),
            "unavailable" => Some(ValueFlag::Unavailable),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckpointValue {
    pub value: f64,
    pub flag: ValueFlag,
}

impl CheckpointValue {
    fn ok(value: f64) -> Self {
        CheckpointValue {
            value,
            flag: ValueFlag::Ok,
        }
    }

    fn saturated(value: f64) -> Self {
        CheckpointValue {
            value,
            flag: ValueFlag::Saturated,
        }
    }

    fn unavailable() -> Self {
        CheckpointValue {
            value: f64::NAN,
            flag: ValueFlag::Unavailable,
        }
    }
}

/// Everything shared across orbits of one run.
pub struct EngineSetup<'a> {
    pub params: &'a MapParams,
    pub rots: &'a FreqSource,
    /// Sorted even checkpoint iteration counts.
    pub ladder: &'a [u64],
    pub indicators: &'a [IndicatorId],
    pub weights: &'a WeightTables,
}

/// Values per checkpoint (outer) per selected indicator (inner, in
/// `setup.indicators` order).
pub type OrbitSeries = Vec<Vec<CheckpointValue>>;

struct PlaneWindows {
    first: Vec<KahanSum>,
    second: Vec<KahanSum>,
}

/// Run the full indicator engine over one (surviving) orbit.
pub fn run_orbit(initial: State, setup: &EngineSetup) -> OrbitSeries {
    let inds = setup.indicators;
    let need = |id: IndicatorId| inds.contains(&id);
    let need_le = need(IndicatorId::Le);
    let need_fli = need(IndicatorId::Fli);
    let need_fli_wb = need(IndicatorId::FliWb);
    let need_megno = need(IndicatorId::Megno);
    let need_gali = need(IndicatorId::Gali4);
    let need_fma = need(IndicatorId::Fma);
    let need_bf = need(IndicatorId::Bf);
    let need_tangent = need_le || need_megno || need_gali || need_bf;
    let need_dev = need_fli || need_fli_wb;

    let ladder = setup.ladder;
    let k_cp = ladder.len();
    let halves: Vec<u64> = ladder.iter().map(|&n| n / 2).collect();
    let mu = setup.params.mu;
    let rc2 = setup.params.r_c * setup.params.r_c;
    let rots = setup.rots;

    // Weight window slices per checkpoint.
    let fli_windows: Vec<(&[f64], f64)> = if need_fli_wb {
        ladder
            .iter()
            .map(|&n| {
                let w = setup.weights.window(n as usize);
                (setup.weights.weights(w), w.denominator)
            })
            .collect()
    } else {
        Vec::new()
    };
    let half_windows: Vec<(&[f64], f64)> = if need_fma {
        halves
            .iter()
            .map(|&m| {
                let w = setup.weights.window((m - 1) as usize);
                (setup.weights.weights(w), w.denominator)
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut x = initial;
    let mut tangent = Matrix4::identity();
    let mut tracker = DeviationTracker::new(Vector4::new(1.0, 0.0, 0.0, 0.0));
    let mut megno = MegnoAccumulator::new();
    let mut fli_prefix = 0.0f64;
    let mut last_frob2 = 4.0f64; // Frobenius² of the identity
    let mut bf_sum = 0.0f64;
    let mut saturated = false;
    let mut bf_frozen = false;
    let mut lost = false;

    // FLI^WB numerators per checkpoint.
    let mut fli_nums: Vec<KahanSum> = vec![KahanSum::new(); if need_fli_wb { k_cp } else { 0 }];
    // FMA accumulators per plane per half per checkpoint.
    let mut wx = PlaneWindows {
        first: vec![KahanSum::new(); if need_fma { k_cp } else { 0 }],
        second: vec![KahanSum::new(); if need_fma { k_cp } else { 0 }],
    };
    let mut wy = PlaneWindows {
        first: vec![KahanSum::new(); if need_fma { k_cp } else { 0 }],
        second: vec![KahanSum::new(); if need_fma { k_cp } else { 0 }],
    };
    let mut phase_ok = need_fma;
    let (mut theta_x, mut theta_y) = (0.0f64, 0.0f64);
    if need_fma {
        if (x.x == 0.0 && x.px == 0.0) || (x.y == 0.0 && x.py == 0.0) {
            phase_ok = false;
        } else {
            theta_x = henon_core::freq::phase(x.x, x.px);
            theta_y = henon_core::freq::phase(x.y, x.py);
        }
    }

    // Monotone window pointers (see module docs): active ranges are
    // contiguous in checkpoint index because the ladder is sorted.
    let mut fli_lo = 0usize; // FLI^WB windows [0, n_j): active while i < n_j
    let mut fh_lo = 0usize; // FMA first halves [0, m_j - 1)
    let mut sec_lo = 0usize; // FMA second halves [m_j, n_j - 1): lower bound by i < n_j - 1
    let mut sec_hi = 0usize; // ... upper bound by m_j <= i
    let mut cp_idx = 0usize;

    let mut out: OrbitSeries = Vec::with_capacity(k_cp);
    let horizon = *ladder.last().expect("ladder nonempty");

    for n in 0..horizon {
        let i = n; // advance/increment index of this step
        while fli_lo < k_cp && ladder[fli_lo] <= i {
            fli_lo += 1;
        }
        while fh_lo < k_cp && halves[fh_lo] - 1 <= i {
            fh_lo += 1;
        }
        while sec_lo < k_cp && ladder[sec_lo] - 1 <= i {
            sec_lo += 1;
        }
        while sec_hi < k_cp && halves[sec_hi] <= i {
            sec_hi += 1;
        }

        let rot = rots.rotation(n);

        if need_tangent && !saturated && !lost {
            propagate_tangent(&mut tangent, &x, &rot, mu);
            let frob2 = le_squared(&tangent);
            if frob2.is_finite() {
                last_frob2 = frob2;
                if need_megno {
                    megno.push_ln_le(0.5 * frob2.ln());
                }
                if need_bf && !bf_frozen {
                    let s = bf_sum + frob2;
                    if s.is_finite() {
                        bf_sum = s;
                    } else {
                        bf_frozen = true;
                    }
                }
            } else {
                saturated = true;
            }
        }

        if need_dev && !lost {
            let c = tracker.step(&x, &rot, mu);
            fli_prefix += c;
            if need_fli_wb {
                let iu = i as usize;
                for j in fli_lo..k_cp {
                    fli_nums[j].add(fli_windows[j].0[iu] * c);
                }
            }
        }

        let x_next = forward_step_rot(&x, &rot, mu);
        if !x_next.is_finite() || x_next.norm_squared() >= rc2 {
            lost = true;
        }

        if need_fma && phase_ok && !lost {
            if (x_next.x == 0.0 && x_next.px == 0.0) || (x_next.y == 0.0 && x_next.py == 0.0) {
                phase_ok = false;
            } else {
                let tx = henon_core::freq::phase(x_next.x, x_next.px);
                let ty = henon_core::freq::phase(x_next.y, x_next.py);
                let dx = henon_core::freq::wrap_advance(tx - theta_x);
                let dy = henon_core::freq::wrap_advance(ty - theta_y);
                theta_x = tx;
                theta_y = ty;
                for j in fh_lo..k_cp {
                    let w = half_windows[j].0[i as usize];
                    wx.first[j].add(w * dx);
                    wy.first[j].add(w * dy);
                }
                for j in sec_lo..sec_hi {
                    let w = half_windows[j].0[(i - halves[j]) as usize];
                    wx.second[j].add(w * dx);
                    wy.second[j].add(w * dy);
                }
            }
        }

        x = x_next;

        if cp_idx < k_cp && n + 1 == ladder[cp_idx] {
            let n_cp = ladder[cp_idx];
            let mut row = Vec::with_capacity(inds.len());
            for &id in inds {
                let v = if lost {
                    CheckpointValue::unavailable()
                } else {
                    match id {
                        IndicatorId::Le => {
                            let le = last_frob2.sqrt();
                            if saturated {
                                CheckpointValue::saturated(le)
                            } else {
                                CheckpointValue::ok(le)
                            }
                        }
                        IndicatorId::Fli => CheckpointValue::ok(fli_prefix),
                        IndicatorId::FliWb => {
                            let (_, den) = fli_windows[cp_idx];
                            CheckpointValue::ok(fli_nums[cp_idx].value() / den)
                        }
                        IndicatorId::Megno => {
                            let y = megno.value();
                            if saturated {
                                CheckpointValue::saturated(y)
                            } else {
                                CheckpointValue::ok(y)
                            }
                        }
                        IndicatorId::Gali4 => {
                            if saturated {
                                CheckpointValue::saturated(GALI_FLOOR)
                            } else {
                                CheckpointValue::ok(gali4(&tangent))
                            }
                        }
                        IndicatorId::Rem => {
                            match rem_return_defect(&x, &initial, setup.params, rots, n_cp) {
                                Ok(v) => CheckpointValue::ok(v),
                                Err(_) => CheckpointValue::unavailable(),
                            }
                        }
                        IndicatorId::Fma => {
                            if !phase_ok {
                                CheckpointValue::unavailable()
                            } else {
                                let (_, den) = half_windows[cp_idx];
                                let nu_x1 = wx.first[cp_idx].value() / den;
                                let nu_x2 = wx.second[cp_idx].value() / den;
                                let nu_y1 = wy.first[cp_idx].value() / den;
                                let nu_y2 = wy.second[cp_idx].value() / den;
                                let dx = henon_core::freq::circular_distance(nu_x1, nu_x2);
                                let dy = henon_core::freq::circular_distance(nu_y1, nu_y2);
                                CheckpointValue::ok((dx * dx + dy * dy).sqrt())
                            }
                        }
                        IndicatorId::Bf => {
                            let e = bf_sum.sqrt();
                            if saturated || bf_frozen {
                                CheckpointValue::saturated(e)
                            } else {
                                CheckpointValue::ok(e)
                            }
                        }
                    }
                };
                row.push(v);
            }
            out.push(row);
            cp_idx += 1;
        }
    }
    out
}
