//! The 4d modulated Hénon map: kick + rotation steps, analytic inverse,
//! single-step Jacobian, and orbit tracking with loss detection.
//!
//! State ordering is fixed as `(x, p_x, y, p_y)` everywhere; the symplectic
//! form returned by [`symplectic_form`] is built for that ordering.
//!
//! Note on the cubic terms: the momentum kicks implemented here are the
//! gradient (octupole) form `μ(x³ − 3xy²)` and `μ(y³ − 3x²y)`. The cross
//! terms must carry squared factors, otherwise the kick is not a gradient
//! field and the map loses symplecticity.

use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

/// A point in 4d phase space.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct State {
    pub x: f64,
    pub px: f64,
    pub y: f64,
    pub py: f64,
}

impl State {
    pub const ZERO: State = State {
        x: 0.0,
        px: 0.0,
        y: 0.0,
        py: 0.0,
    };

    pub fn new(x: f64, px: f64, y: f64, py: f64) -> Self {
        State { x, px, y, py }
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.px * self.px + self.y * self.y + self.py * self.py
    }

    /// Euclidean 4-norm (distance to the origin).
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.px.is_finite() && self.y.is_finite() && self.py.is_finite()
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x, self.px, self.y, self.py)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        State::new(v[0], v[1], v[2], v[3])
    }

    /// Max-norm distance to another state.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.px - other.px).abs())
            .max((self.y - other.y).abs())
            .max((self.py - other.py).abs())
    }

    pub fn distance(&self, other: &State) -> f64 {
        let dx = self.x - other.x;
        let dpx = self.px - other.px;
        let dy = self.y - other.y;
        let dpy = self.py - other.py;
        (dx * dx + dpx * dpx + dy * dy + dpy * dpy).sqrt()
    }
}

/// One ripple harmonic of the linear-frequency modulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    /// Dimensionless amplitude ε_k (typically ~1e-4).
    pub amplitude: f64,
    /// Angular frequency Ω_k in radians per iteration.
    pub frequency: f64,
}

/// Frequency-modulation specification: overall amplitude ε plus harmonics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Modulation {
    pub epsilon: f64,
    pub harmonics: Vec<Harmonic>,
}

/// The seven tune-ripple harmonics measured on the CERN SPS main power
/// supplies (50 Hz mains lines at harmonic numbers 1, 2, 3, 6, 7, 10 and 12
/// of the base ripple tune 1/868.12). The standard modulation set for
/// frequency-ripple studies of this map.
pub fn ripple_harmonics() -> Vec<Harmonic> {
    const BASE: f64 = std::f64::consts::TAU / 868.12;
    const SET: [(f64, f64); 7] = [
        (1.000e-4, 1.0),
        (0.218e-4, 2.0),
        (0.708e-4, 3.0),
        (0.254e-4, 6.0),
        (0.100e-4, 7.0),
        (0.078e-4, 10.0),
        (0.218e-4, 12.0),
    ];
    SET.iter()
        .map(|&(amplitude, k)| Harmonic {
            amplitude,
            frequency: BASE * k,
        })
        .collect()
}

impl Modulation {
    /// No modulation (ε = 0, no harmonics).
    pub fn none() -> Self {
        Modulation::default()
    }

    /// The standard seven-harmonic ripple set at overall amplitude ε.
    pub fn ripple(epsilon: f64) -> Self {
        Modulation {
            epsilon,
            harmonics: ripple_harmonics(),
        }
    }

    /// Multiplicative factor `1 + ε Σ_k ε_k cos(Ω_k n)` at iteration `n`.
    pub fn factor(&self, n: u64) -> f64 {
        if self.epsilon == 0.0 || self.harmonics.is_empty() {
            return 1.0;
        }
        let t = n as f64;
        let mut sum = 0.0;
        for h in &self.harmonics {
            sum += h.amplitude * (h.frequency * t).cos();
        }
        1.0 + self.epsilon * sum
    }
}

/// All parameters of the 4d modulated Hénon map.
#[derive(Clone, Debug, PartialEq)]
pub struct MapParams {
    /// Base horizontal angular frequency, radians/iteration, in (0, 2π).
    pub omega_x0: f64,
    /// Base vertical angular frequency, radians/iteration, in (0, 2π).
    pub omega_y0: f64,
    /// Cubic (octupole) nonlinearity strength.
    pub mu: f64,
    pub modulation: Modulation,
    /// Loss radius: an orbit is lost once its 4-norm reaches this value.
    pub r_c: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("base frequency {0} outside (0, 2*pi)")]
    FrequencyOutOfRange(f64),
    #[error("loss radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("modulation amplitude must be nonnegative, got {0}")]
    NegativeModulation(f64),
}

impl MapParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let tau = std::f64::consts::TAU;
        for w in [self.omega_x0, self.omega_y0] {
            if !(w > 0.0 && w < tau) {
                return Err(ParamError::FrequencyOutOfRange(w));
            }
        }
        if !(self.r_c > 0.0) {
            return Err(ParamError::NonPositiveRadius(self.r_c));
        }
        if self.modulation.epsilon < 0.0 {
            return Err(ParamError::NegativeModulation(self.modulation.epsilon));
        }
        for h in &self.modulation.harmonics {
            if h.amplitude < 0.0 {
                return Err(ParamError::NegativeModulation(h.amplitude));
            }
        }
        Ok(())
    }
}

/// Modulated angular frequencies `(ω_x,n, ω_y,n)` at iteration `n`.
pub fn modulated_frequencies(params: &MapParams, n: u64) -> (f64, f64) {
    let f = params.modulation.factor(n);
    (params.omega_x0 * f, params.omega_y0 * f)
}

/// Precomputed sines/cosines of the two rotation angles for one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub cos_x: f64,
    pub sin_x: f64,
    pub cos_y: f64,
    pub sin_y: f64,
}

impl Rotation {
    pub fn new(omega_x: f64, omega_y: f64) -> Self {
        let (sin_x, cos_x) = omega_x.sin_cos();
        let (sin_y, cos_y) = omega_y.sin_cos();
        Rotation {
            cos_x,
            sin_x,
            cos_y,
            sin_y,
        }
    }
}

/// Provider of the per-iteration rotation. Implemented directly by
/// [`MapParams`]; callers that iterate many orbits over the same parameter
/// set can supply a precomputed table instead (same values, same bits).
pub trait RotationSource {
    fn rotation(&self, n: u64) -> Rotation;
}

impl RotationSource for MapParams {
    fn rotation(&self, n: u64) -> Rotation {
        let (wx, wy) = modulated_frequencies(self, n);
        Rotation::new(wx, wy)
    }
}

/// Momentum kicks `(Δp_x, Δp_y)` from the quadratic + cubic nonlinearities.
#[inline(always)]
pub fn kick(x: f64, y: f64, mu: f64) -> (f64, f64) {
    let x2 = x * x;
    let y2 = y * y;
    let dpx = x2 - y2 + mu * (x2 * x - 3.0 * x * y2);
    let dpy = -2.0 * x * y + mu * (y2 * y - 3.0 * x2 * y);
    (dpx, dpy)
}

/// Partial derivatives of the kick: `a = ∂Δp_x/∂x`, `b = ∂Δp_x/∂y = ∂Δp_y/∂x`,
/// `c = ∂Δp_y/∂y`. Equality of the mixed partials is what makes the map
/// symplectic.
#[inline(always)]
pub fn kick_jacobian(x: f64, y: f64, mu: f64) -> (f64, f64, f64) {
    let a = 2.0 * x + 3.0 * mu * (x * x - y * y);
    let b = -2.0 * y - 6.0 * mu * x * y;
    let c = -2.0 * x + 3.0 * mu * (y * y - x * x);
    (a, b, c)
}

/// One forward iteration with a precomputed rotation (hot path, no checks).
#[inline(always)]
pub fn forward_step_rot(s: &State, rot: &Rotation, mu: f64) -> State {
    let (dpx, dpy) = kick(s.x, s.y, mu);
    let px = s.px + dpx;
    let py = s.py + dpy;
    State {
        x: rot.cos_x * s.x + rot.sin_x * px,
        px: -rot.sin_x * s.x + rot.cos_x * px,
        y: rot.cos_y * s.y + rot.sin_y * py,
        py: -rot.sin_y * s.y + rot.cos_y * py,
    }
}

/// One inverse iteration: rotate back, then subtract the kicks (which depend
/// only on the positions, unchanged by the kick itself).
#[inline(always)]
pub fn inverse_step_rot(s: &State, rot: &Rotation, mu: f64) -> State {
    let x = rot.cos_x * s.x - rot.sin_x * s.px;
    let pxk = rot.sin_x * s.x + rot.cos_x * s.px;
    let y = rot.cos_y * s.y - rot.sin_y * s.py;
    let pyk = rot.sin_y * s.y + rot.cos_y * s.py;
    let (dpx, dpy) = kick(x, y, mu);
    State {
        x,
        px: pxk - dpx,
        y,
        py: pyk - dpy,
    }
}

/// Non-finite result of a map step; the polynomial terms diverge
/// super-exponentially past the loss radius, so this is a loss event.
#[derive(Debug, Error, PartialEq)]
#[error("map step overflowed at iteration {n}")]
pub struct Overflow {
    pub n: u64,
}

/// Forward step `x_{n+1} = M(x_n, n)`.
pub fn forward_step(s: &State, params: &MapParams, n: u64) -> Result<State, Overflow> {
    let out = forward_step_rot(s, &params.rotation(n), params.mu);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Overflow { n })
    }
}

/// Inverse step undoing the forward step of index `n`:
/// `inverse_step(forward_step(s, n), n) == s` up to roundoff.
pub fn inverse_step(s: &State, params: &MapParams, n: u64) -> Result<State, Overflow> {
    let out = inverse_step_rot(s, &params.rotation(n), params.mu);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Overflow { n })
    }
}

/// Single-step Jacobian `DM = R(ω_n) · K(state)` as a dense matrix.
pub fn jacobian_rot(s: &State, rot: &Rotation, mu: f64) -> Matrix4<f64> {
    let (a, b, c) = kick_jacobian(s.x, s.y, mu);
    let (cx, sx, cy, sy) = (rot.cos_x, rot.sin_x, rot.cos_y, rot.sin_y);
    Matrix4::new(
        cx + sx * a,
        sx,
        sx * b,
        0.0,
        cx * a - sx,
        cx,
        cx * b,
        0.0,
        sy * b,
        0.0,
        cy + sy * c,
        sy,
        cy * b,
        0.0,
        cy * c - sy,
        cy,
    )
}

/// Single-step Jacobian at iteration `n`.
pub fn jacobian(s: &State, params: &MapParams, n: u64) -> Matrix4<f64> {
    jacobian_rot(s, &params.rotation(n), params.mu)
}

/// Apply `DM(s, n)` to the four components of one tangent column.
#[inline(always)]
fn apply_dm_components(
    v: (f64, f64, f64, f64),
    a: f64,
    b: f64,
    c: f64,
    rot: &Rotation,
) -> (f64, f64, f64, f64) {
    let (vx, vpx, vy, vpy) = v;
    let kx = vpx + a * vx + b * vy;
    let ky = vpy + b * vx + c * vy;
    (
        rot.cos_x * vx + rot.sin_x * kx,
        -rot.sin_x * vx + rot.cos_x * kx,
        rot.cos_y * vy + rot.sin_y * ky,
        -rot.sin_y * vy + rot.cos_y * ky,
    )
}

/// In-place tangent propagation `L ← DM(s, n) · L`, exploiting the
/// kick-then-rotation structure. This is the canonical propagation path used
/// by orbit tracking.
#[inline]
pub fn propagate_tangent(l: &mut Matrix4<f64>, s: &State, rot: &Rotation, mu: f64) {
    let (a, b, c) = kick_jacobian(s.x, s.y, mu);
    for j in 0..4 {
        let col = (l[(0, j)], l[(1, j)], l[(2, j)], l[(3, j)]);
        let (nx, npx, ny, npy) = apply_dm_components(col, a, b, c, rot);
        l[(0, j)] = nx;
        l[(1, j)] = npx;
        l[(2, j)] = ny;
        l[(3, j)] = npy;
    }
}

/// In-place deviation-vector propagation `v ← DM(s, n) · v`.
#[inline]
pub fn propagate_deviation(v: &mut Vector4<f64>, s: &State, rot: &Rotation, mu: f64) {
    let (a, b, c) = kick_jacobian(s.x, s.y, mu);
    let (nx, npx, ny, npy) = apply_dm_components((v[0], v[1], v[2], v[3]), a, b, c, rot);
    v[0] = nx;
    v[1] = npx;
    v[2] = ny;
    v[3] = npy;
}

/// The standard symplectic form S for the `(x, p_x, y, p_y)` ordering.
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Max-norm of `MᵀSM − S`; zero for an exactly symplectic matrix.
pub fn symplectic_defect(m: &Matrix4<f64>) -> f64 {
    let s = symplectic_form();
    let d = m.transpose() * s * m - s;
    d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Result of tracking one orbit up to `n_max` or loss.
#[derive(Clone, Debug)]
pub struct TrackingOutcome {
    pub survived: bool,
    /// First iteration count at which the norm reached `r_c` (absent if the
    /// orbit survived).
    pub n_stab: Option<u64>,
    /// `(n, state)` at each requested checkpoint reached before loss.
    pub checkpoints: Vec<(u64, State)>,
    /// Accumulated tangent maps at the same checkpoints, if requested.
    pub tangents: Vec<(u64, Matrix4<f64>)>,
}

/// Track an orbit for `n_max` iterations, recording the state (and the
/// accumulated tangent map, if `with_tangent`) at each checkpoint.
///
/// Loss is declared at the first `n` with `‖x_n‖ ≥ r_c`; a non-finite state
/// counts as a loss at that iteration, never a crash. `checkpoints` must be
/// strictly increasing within `[1, n_max]`.
pub fn track_orbit(
    initial: State,
    params: &MapParams,
    n_max: u64,
    checkpoints: &[u64],
    with_tangent: bool,
) -> TrackingOutcome {
    track_orbit_with(initial, params, params, n_max, checkpoints, with_tangent)
}

/// [`track_orbit`] with an explicit rotation source (e.g. a precomputed
/// table); results are bit-identical to the direct form.
pub fn track_orbit_with<R: RotationSource>(
    initial: State,
    params: &MapParams,
    rots: &R,
    n_max: u64,
    checkpoints: &[u64],
    with_tangent: bool,
) -> TrackingOutcome {
    debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
    assert!(
        checkpoints.iter().all(|&n| n >= 1 && n <= n_max),
        "checkpoints must lie in [1, n_max]"
    );
    let rc2 = params.r_c * params.r_c;
    let mut state = initial;
    let mut tangent = with_tangent.then(Matrix4::identity);
    let mut out = TrackingOutcome {
        survived: true,
        n_stab: None,
        checkpoints: Vec::with_capacity(checkpoints.len()),
        tangents: Vec::with_capacity(if with_tangent { checkpoints.len() } else { 0 }),
    };
    let mut next_cp = checkpoints.iter().copied().peekable();
    for n in 0..n_max {
        let rot = rots.rotation(n);
        if let Some(l) = tangent.as_mut() {
            propagate_tangent(l, &state, &rot, params.mu);
        }
        state = forward_step_rot(&state, &rot, params.mu);
        let reached = n + 1;
        if !state.is_finite() || state.norm_squared() >= rc2 {
            out.survived = false;
            out.n_stab = Some(reached);
            return out;
        }
        if next_cp.peek() == Some(&reached) {
            next_cp.next();
            out.checkpoints.push((reached, state));
            if let Some(l) = tangent.as_ref() {
                out.tangents.push((reached, *l));
            }
        }
    }
    out
}
