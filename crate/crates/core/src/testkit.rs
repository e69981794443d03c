//! Deterministic sampling and extended-precision helpers for the verification
//! suites. Everything here is seed-driven and dependency-free so that oracle
//! tests reproduce bit-identically across platforms.

use crate::map::{forward_step_rot, Rotation, State};
use nalgebra::{Matrix4, Vector4};

/// SplitMix64 generator; tiny, seedable, and stable forever.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_f64().max(1e-300);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn unit_vector4(&mut self) -> Vector4<f64> {
        loop {
            let v = Vector4::new(self.normal(), self.normal(), self.normal(), self.normal());
            let n = v.norm();
            if n > 1e-6 {
                return v / n;
            }
        }
    }

    pub fn state_in_ball(&mut self, radius: f64) -> State {
        loop {
            let s = State::new(
                self.in_range(-radius, radius),
                self.in_range(-radius, radius),
                self.in_range(-radius, radius),
                self.in_range(-radius, radius),
            );
            if s.norm() <= radius {
                return s;
            }
        }
    }
}

/// The symplectic kick factor with gradient structure
/// `[[1,0,0,0],[a,1,b,0],[0,0,1,0],[b,0,c,1]]`.
pub fn kick_factor(a: f64, b: f64, c: f64) -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        a, 1.0, b, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        b, 0.0, c, 1.0,
    )
}

/// The block-diagonal rotation factor.
pub fn rotation_factor(theta_x: f64, theta_y: f64) -> Matrix4<f64> {
    let (sx, cx) = theta_x.sin_cos();
    let (sy, cy) = theta_y.sin_cos();
    Matrix4::new(
        cx, sx, 0.0, 0.0, //
        -sx, cx, 0.0, 0.0, //
        0.0, 0.0, cy, sy, //
        0.0, 0.0, -sy, cy,
    )
}

/// A random symplectic 4×4 matrix: a product of `factors` alternating
/// rotations and bounded kick shears. Moderate conditioning by construction,
/// suitable for 1e-8-level oracle comparisons.
pub fn random_symplectic(rng: &mut SplitMix64, factors: usize, shear_scale: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    for _ in 0..factors {
        let r = rotation_factor(
            rng.in_range(0.0, std::f64::consts::TAU),
            rng.in_range(0.0, std::f64::consts::TAU),
        );
        let k = kick_factor(
            rng.in_range(-shear_scale, shear_scale),
            rng.in_range(-shear_scale, shear_scale),
            rng.in_range(-shear_scale, shear_scale),
        );
        m = r * k * m;
    }
    m
}

/// An orthogonal symplectic matrix (product of block rotations only).
pub fn random_orthogonal_symplectic(rng: &mut SplitMix64, factors: usize) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    for _ in 0..factors {
        m = rotation_factor(
            rng.in_range(0.0, std::f64::consts::TAU),
            rng.in_range(0.0, std::f64::consts::TAU),
        ) * m;
    }
    m
}

/// Double-double value `hi + lo` with `|lo| <= ulp(hi)/2`; enough extended
/// precision to serve as an independent oracle for f64 kernels.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, x: f64) -> Dd {
        self.mul(Dd::from(x))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Extended-precision straight-line re-implementation of one forward map
/// step, taking the rotation sines/cosines as exact f64 inputs. Independent
/// of [`forward_step_rot`]'s evaluation order.
pub fn forward_step_oracle(s: &State, rot: &Rotation, mu: f64) -> State {
    let x = Dd::from(s.x);
    let y = Dd::from(s.y);
    let x2 = x.mul(x);
    let y2 = y.mul(y);
    let x3 = x2.mul(x);
    let dpx = x2
        .sub(y2)
        .add(Dd::from(mu).mul(x3.sub(x.mul(y2).mul_f64(3.0))));
    let y3 = y2.mul(y);
    let dpy = x
        .mul(y)
        .mul_f64(-2.0)
        .add(Dd::from(mu).mul(y3.sub(x2.mul(y).mul_f64(3.0))));
    let px = Dd::from(s.px).add(dpx);
    let py = Dd::from(s.py).add(dpy);
    let nx = x.mul_f64(rot.cos_x).add(px.mul_f64(rot.sin_x));
    let npx = px.mul_f64(rot.cos_x).sub(x.mul_f64(rot.sin_x));
    let ny = y.mul_f64(rot.cos_y).add(py.mul_f64(rot.sin_y));
    let npy = py.mul_f64(rot.cos_y).sub(y.mul_f64(rot.sin_y));
    State::new(nx.to_f64(), npx.to_f64(), ny.to_f64(), npy.to_f64())
}

/// Sanity hook for the oracle itself: one plain-f64 step for comparison.
pub fn forward_step_plain(s: &State, rot: &Rotation, mu: f64) -> State {
    forward_step_rot(s, rot, mu)
}

/// Extended-precision evaluation of the modulation factor
/// `1 + ε Σ ε_k cos(Ω_k n)` (cosines taken as exact f64 inputs).
pub fn modulation_factor_oracle(epsilon: f64, harmonics: &[(f64, f64)], n: u64) -> f64 {
    let mut sum = Dd::from(0.0);
    let t = n as f64;
    for &(amp, freq) in harmonics {
        sum = sum.add(Dd::from(amp).mul_f64((freq * t).cos()));
    }
    Dd::from(1.0).add(sum.mul_f64(epsilon)).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::symplectic_defect;

    #[test]
    fn random_symplectic_is_symplectic() {
        let mut rng = SplitMix64::new(42);
        for _ in 0..20 {
            let m = random_symplectic(&mut rng, 12, 0.8);
            assert!(symplectic_defect(&m) < 1e-11 * m.norm().powi(2).max(1.0));
            assert!((m.determinant() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn dd_mul_recovers_products_exactly() {
        let a = Dd::from(1.0 + 2f64.powi(-30));
        let b = Dd::from(1.0 - 2f64.powi(-30));
        let p = a.mul(b);
        // (1+e)(1-e) = 1 - e^2 with e^2 = 2^-60 far below f64 ulp of 1.
        assert_eq!(p.hi, 1.0);
        assert!((p.lo + 2f64.powi(-60)).abs() < 1e-24);
    }
}
