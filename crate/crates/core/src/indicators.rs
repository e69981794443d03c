//! Chaos indicators computed along tracked orbits: Lyapunov error and its
//! covariance invariants, FLI (plain and Birkhoff-weighted), MEGNO-filtered
//! LE, GALI^(k), the forward-backward reversibility error, and the
//! roundoff-based reversibility error REM.

use crate::map::{
    forward_step_rot, inverse_step_rot, propagate_deviation, MapParams, Rotation, RotationSource,
    State,
};
use crate::stats::KahanSum;
use nalgebra::{DMatrix, Matrix4, Vector4};
use thiserror::Error;

/// Sentinel floor for GALI values whose parallelotope volume underflows;
/// the product of four singular values at roundoff scale (~1e-16 each).
pub const GALI_FLOOR: f64 = 1e-64;

/// Noise scale attributed to roundoff in REM: the unit roundoff 2^-52.
pub const REM_NOISE_SCALE: f64 = f64::EPSILON;

/// Squared Lyapunov error: `Tr(LᵀL)`, i.e. the squared Frobenius norm.
/// May overflow to `+inf` for strongly chaotic tangent maps; callers treat a
/// non-finite value as saturation.
#[inline]
pub fn le_squared(l: &Matrix4<f64>) -> f64 {
    l.iter().map(|v| v * v).sum()
}

/// Lyapunov error `LE = sqrt(Tr(LᵀL))`; independent of any deviation-vector
/// choice. Equals 2 for an orthogonal (pure-rotation) tangent map.
pub fn lyapunov_error(l: &Matrix4<f64>) -> f64 {
    le_squared(l).sqrt()
}

/// The four characteristic-polynomial coefficients of the covariance matrix
/// `Σ² = L·Lᵀ`, with signs fixed so that all are nonnegative: `values[k-1]`
/// is the sum of the k×k principal minors of `Σ²` (the k-th elementary
/// symmetric function of its eigenvalues).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceInvariants {
    pub values: [f64; 4],
}

impl CovarianceInvariants {
    /// `I^(k)` for `k` in `1..=4`.
    pub fn i(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Covariance invariants via sums of principal minors of `Σ² = L·Lᵀ`.
/// `I^(1) = LE²`; `I^(4) = det Σ² = 1` for a symplectic map.
pub fn covariance_invariants(l: &Matrix4<f64>) -> CovarianceInvariants {
    let s = l * l.transpose();
    let d = |i: usize, j: usize| s[(i, j)];
    let i1 = d(0, 0) + d(1, 1) + d(2, 2) + d(3, 3);
    let mut i2 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            i2 += d(i, i) * d(j, j) - d(i, j) * d(j, i);
        }
    }
    let minor3 = |r: [usize; 3]| {
        let [a, b, c] = r;
        d(a, a) * (d(b, b) * d(c, c) - d(b, c) * d(c, b))
            - d(a, b) * (d(b, a) * d(c, c) - d(b, c) * d(c, a))
            + d(a, c) * (d(b, a) * d(c, b) - d(b, b) * d(c, a))
    };
    let i3 = minor3([1, 2, 3]) + minor3([0, 2, 3]) + minor3([0, 1, 3]) + minor3([0, 1, 2]);
    let i4 = s.determinant();
    CovarianceInvariants {
        values: [i1, i2, i3, i4],
    }
}

/// Fast Lyapunov Indicator: `ln ‖L·ξ‖` for a unit deviation `ξ`.
pub fn fli(l: &Matrix4<f64>, xi: &Vector4<f64>) -> f64 {
    debug_assert!((xi.norm() - 1.0).abs() < 1e-12, "xi must be a unit vector");
    (l * xi).norm().ln()
}

/// Birkhoff bump weight `exp(-1/(t(1-t)))` on (0, 1), zero elsewhere.
#[inline]
pub fn birkhoff_weight(t: f64) -> f64 {
    if t > 0.0 && t < 1.0 {
        (-1.0 / (t * (1.0 - t))).exp()
    } else {
        0.0
    }
}

/// Normalized Birkhoff weights `ŵ(i/n)` for `i = 0..n-1`; they sum to 1.
pub fn birkhoff_weights(n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|i| birkhoff_weight(i as f64 / n as f64))
        .collect();
    let mut total = KahanSum::new();
    for v in &w {
        total.add(*v);
    }
    let t = total.value();
    if t > 0.0 {
        for v in &mut w {
            *v /= t;
        }
    }
    w
}

/// Birkhoff-weighted mean `Σ ŵ(i/n)·v_i` with normalized weights.
///
/// For a single-element input the weight at t = 0 vanishes, so the plain
/// mean is returned instead of 0/0.
pub fn weighted_birkhoff_mean(values: &[f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for (i, &v) in values.iter().enumerate() {
        let w = birkhoff_weight(i as f64 / nf);
        num.add(w * v);
        den.add(w);
    }
    if den.value() == 0.0 {
        return values.iter().sum::<f64>() / nf;
    }
    num.value() / den.value()
}

/// Weighted FLI from per-step log-increments `ln‖y_i − x_i‖` of the
/// renormalized deviation: `FLI^WB = Σ ŵ(i/n)·increment_i`.
pub fn fli_weighted(increments: &[f64]) -> f64 {
    weighted_birkhoff_mean(increments)
}

/// Tracks a unit deviation vector with per-iteration renormalization,
/// yielding the log-increments that sum (uniformly) to `ln ‖L_n ξ‖`.
#[derive(Clone, Debug)]
pub struct DeviationTracker {
    v: Vector4<f64>,
}

impl DeviationTracker {
    pub fn new(xi: Vector4<f64>) -> Self {
        DeviationTracker { v: xi.normalize() }
    }

    /// Advance through one map step at state `s`; returns the log-increment
    /// `ln ‖DM·v‖` and renormalizes the internal vector.
    #[inline]
    pub fn step(&mut self, s: &State, rot: &Rotation, mu: f64) -> f64 {
        propagate_deviation(&mut self.v, s, rot, mu);
        let norm = self.v.norm();
        self.v /= norm;
        norm.ln()
    }

    pub fn vector(&self) -> &Vector4<f64> {
        &self.v
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MegnoError {
    #[error("MEGNO undefined: LE value at iteration {0} is not positive")]
    NonPositive(usize),
}

/// MEGNO filter applied to an LE series sampled at every iteration `1..=n`:
/// `Y_n = (2/n) Σ_{k=2}^{n} k·ln(LE_k/LE_{k-1})`.
///
/// Converges to `2α` when `LE_k ~ k^α` and grows as `λ·n` when `LE_k ~ e^{λk}`.
pub fn megno(le_series: &[f64]) -> Result<f64, MegnoError> {
    let n = le_series.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut acc = MegnoAccumulator::new();
    for (k, &v) in le_series.iter().enumerate() {
        if !(v > 0.0) || !v.is_finite() {
            return Err(MegnoError::NonPositive(k + 1));
        }
        acc.push_ln_le(v.ln());
    }
    Ok(acc.value())
}

/// Incremental MEGNO state fed with `ln LE_k` once per iteration.
#[derive(Clone, Copy, Debug, Default)]
pub struct MegnoAccumulator {
    count: u64,
    prev_ln: f64,
    sum: f64,
}

impl MegnoAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push_ln_le(&mut self, ln_le: f64) {
        self.count += 1;
        if self.count >= 2 {
            self.sum += self.count as f64 * (ln_le - self.prev_ln);
        }
        self.prev_ln = ln_le;
    }

    /// `Y_n` for the `n` values pushed so far (0 before any push).
    pub fn value(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            2.0 * self.sum / self.count as f64
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GaliError {
    #[error("deviation basis is empty or has more than 4 vectors")]
    BadBasisSize,
    #[error("deviation basis vectors are not linearly independent")]
    DegenerateBasis,
}

/// The standard orthonormal basis of 4d phase space.
pub fn standard_basis() -> [Vector4<f64>; 4] {
    [
        Vector4::new(1.0, 0.0, 0.0, 0.0),
        Vector4::new(0.0, 1.0, 0.0, 0.0),
        Vector4::new(0.0, 0.0, 1.0, 0.0),
        Vector4::new(0.0, 0.0, 0.0, 1.0),
    ]
}

/// GALI^(k): volume of the parallelotope spanned by the normalized tangent
/// images of `k` independent deviation vectors, computed as the product of
/// the singular values of the 4×k matrix of normalized images.
///
/// Returns [`GALI_FLOOR`] when the volume underflows or any image is
/// degenerate (chaotic collapse); errors only on a degenerate input basis.
pub fn gali(l: &Matrix4<f64>, basis: &[Vector4<f64>]) -> Result<f64, GaliError> {
    let k = basis.len();
    if k == 0 || k > 4 {
        return Err(GaliError::BadBasisSize);
    }
    if k > 1 {
        let b = DMatrix::from_fn(4, k, |i, j| basis[j][i]);
        let sv = b.svd(false, false).singular_values;
        let smax = sv.iter().fold(0.0f64, |a, &v| a.max(v));
        let smin = sv.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        if !(smin > smax * 1e-12) {
            return Err(GaliError::DegenerateBasis);
        }
    }
    let mut a = DMatrix::zeros(4, k);
    for (j, eta) in basis.iter().enumerate() {
        let img = l * eta;
        let norm = img.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Ok(GALI_FLOOR);
        }
        for i in 0..4 {
            a[(i, j)] = img[i] / norm;
        }
    }
    let sv = a.svd(false, false).singular_values;
    let mut prod = 1.0f64;
    for v in sv.iter() {
        prod *= v;
    }
    if !prod.is_finite() || prod < GALI_FLOOR {
        return Ok(GALI_FLOOR);
    }
    Ok(prod)
}

/// GALI^(4) with the standard orthonormal basis: the normalized images are
/// the normalized columns of `L` itself. This is the canonical per-checkpoint
/// evaluation used by orbit runs.
pub fn gali4(l: &Matrix4<f64>) -> f64 {
    let mut a = *l;
    for j in 0..4 {
        let norm = a.column(j).norm();
        if !norm.is_finite() || norm == 0.0 {
            return GALI_FLOOR;
        }
        for i in 0..4 {
            a[(i, j)] /= norm;
        }
    }
    let sv = a.singular_values();
    let prod = sv[0] * sv[1] * sv[2] * sv[3];
    if !prod.is_finite() || prod < GALI_FLOOR {
        return GALI_FLOOR;
    }
    prod
}

/// Forward-backward reversibility error from the running LE² series:
/// `E^BF_n = sqrt(Σ_{n'=1}^{n} LE²_{n'})` (symplectic trace identity).
pub fn bf_error(le_squared_series: &[f64]) -> f64 {
    let mut sum = 0.0;
    for &v in le_squared_series {
        sum += v;
    }
    sum.sqrt()
}

#[derive(Debug, Error, PartialEq)]
pub enum RemError {
    #[error("orbit lost during the {dir} pass at iteration {at}")]
    Lost { dir: &'static str, at: u64 },
}

/// Backward half of the REM computation: starting from the forward-pass
/// state at iteration `n`, undo steps `n-1..0` and return the scaled return
/// defect against `initial`. Callers that already track the forward orbit
/// (e.g. checkpoint ladders) fork their state into this directly.
pub fn rem_return_defect<R: RotationSource>(
    state_at_n: &State,
    initial: &State,
    params: &MapParams,
    rots: &R,
    n: u64,
) -> Result<f64, RemError> {
    let rc2 = params.r_c * params.r_c;
    let mu = params.mu;
    let mut s = *state_at_n;
    for k in (0..n).rev() {
        s = inverse_step_rot(&s, &rots.rotation(k), mu);
        if !s.is_finite() || s.norm_squared() >= rc2 {
            return Err(RemError::Lost {
                dir: "backward",
                at: k,
            });
        }
    }
    Ok(s.distance(initial) / (REM_NOISE_SCALE * std::f64::consts::SQRT_2))
}

/// Reversibility error method: run `n` forward steps then `n` backward steps
/// in working precision and measure the roundoff-induced return defect,
/// `REM = ‖y_2n − x_0‖ / (ε√2)` with `ε` the unit roundoff.
///
/// The rotation source must return bit-identical rotations for forward and
/// backward passes (any [`RotationSource`] does by construction).
pub fn rem_with<R: RotationSource>(
    initial: &State,
    params: &MapParams,
    rots: &R,
    n: u64,
) -> Result<f64, RemError> {
    if n == 0 {
        return Ok(0.0);
    }
    let rc2 = params.r_c * params.r_c;
    let mu = params.mu;
    let mut s = *initial;
    for k in 0..n {
        s = forward_step_rot(&s, &rots.rotation(k), mu);
        if !s.is_finite() || s.norm_squared() >= rc2 {
            return Err(RemError::Lost {
                dir: "forward",
                at: k + 1,
            });
        }
    }
    rem_return_defect(&s, initial, params, rots, n)
}

/// [`rem_with`] using direct per-iteration frequency evaluation.
pub fn rem(initial: &State, params: &MapParams, n: u64) -> Result<f64, RemError> {
    rem_with(initial, params, params, n)
}
