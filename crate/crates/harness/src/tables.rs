//! Precomputed per-run tables shared read-only by all workers: rotation
//! sines/cosines per iteration and Birkhoff weight windows per checkpoint.
//! Table entries are produced by exactly the same scalar expressions as the
//! direct evaluations, so table and direct modes are bit-identical.

use crate::ladder::Ladder;
use henon_core::indicators::birkhoff_weight;
use henon_core::map::{MapParams, Rotation, RotationSource};
use henon_core::stats::KahanSum;
use std::collections::BTreeMap;

/// Above this horizon the auto mode falls back to direct evaluation
/// (the table would exceed ~128 MiB).
pub const AUTO_TABLE_LIMIT: u64 = 4_000_000;

/// Rotation source for a run: precomputed table or direct evaluation.
pub enum FreqSource {
    Table(Vec<Rotation>),
    Direct(MapParams),
}

impl FreqSource {
    /// Build according to the config mode string ("auto", "on", "off").
    pub fn build(params: &MapParams, n_max: u64, mode: &str) -> FreqSource {
        let use_table = match mode {
            "on" => true,
            "off" => false,
            _ => n_max <= AUTO_TABLE_LIMIT,
        };
        if use_table {
            let rots = (0..n_max).map(|n| params.rotation(n)).collect();
            FreqSource::Table(rots)
        } else {
            FreqSource::Direct(params.clone())
        }
    }
}

impl RotationSource for FreqSource {
    #[inline(always)]
    fn rotation(&self, n: u64) -> Rotation {
        match self {
            FreqSource::Table(rots) => rots[n as usize],
            FreqSource::Direct(params) => params.rotation(n),
        }
    }
}

/// One normalized-weight window: raw Birkhoff weights at `i/len` and their
/// (Kahan) sum, the normalization denominator.
#[derive(Clone, Debug)]
pub struct WeightWindow {
    offset: usize,
    pub len: usize,
    pub denominator: f64,
}

/// Flat storage of every weight window needed by a checkpoint ladder:
/// one window of length `n_j` per checkpoint (the FLI^WB window) and one of
/// length `n_j/2 - 1` (the FMA half window, shared by both halves).
pub struct WeightTables {
    data: Vec<f64>,
    by_len: BTreeMap<usize, WeightWindow>,
}

impl WeightTables {
    pub fn build(ladder: &Ladder, need_fli_wb: bool, need_fma: bool) -> WeightTables {
        let mut lens: Vec<usize> = Vec::new();
        for &n in &ladder.checkpoints {
            if need_fli_wb {
                lens.push(n as usize);
            }
            if need_fma {
                let half = (n / 2) as usize;
                if half >= 1 {
                    lens.push(half - 1);
                }
            }
        }
        lens.retain(|&l| l >= 1);
        lens.sort_unstable();
        lens.dedup();
        let total: usize = lens.iter().sum();
        let mut data = Vec::with_capacity(total);
        let mut by_len = BTreeMap::new();
        for &len in &lens {
            let offset = data.len();
            let mut den = KahanSum::new();
            for i in 0..len {
                let w = birkhoff_weight(i as f64 / len as f64);
                den.add(w);
                data.push(w);
            }
            by_len.insert(
                len,
                WeightWindow {
                    offset,
                    len,
                    denominator: den.value(),
                },
            );
        }
        WeightTables { data, by_len }
    }

    pub fn window(&self, len: usize) -> &WeightWindow {
        self.by_len
            .get(&len)
            .unwrap_or_else(|| panic!("no weight window of length {len}"))
    }

    #[inline(always)]
    pub fn weights(&self, w: &WeightWindow) -> &[f64] {
        &self.data[w.offset..w.offset + w.len]
    }
}
