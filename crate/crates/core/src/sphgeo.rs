//! Primitives on the round unit sphere: points, tangent vectors, great circles,
//! and the exponential/logarithm maps between them.
//!
//! All angles are radians. Dot products are clamped before `acos`/`asin`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|p| = 1` for points and `v·p = 0` for tangent vectors.
pub const UNIT_TOL: f64 = 1e-9;

/// A plain vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self { x: self.y * o.z - self.z * o.y, y: self.z * o.x - self.x * o.z, z: self.x * o.y - self.y * o.x }
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    pub const E1: SpherePoint = SpherePoint(Vec3::new(1.0, 0.0, 0.0));
    pub const E2: SpherePoint = SpherePoint(Vec3::new(0.0, 1.0, 0.0));
    pub const E3: SpherePoint = SpherePoint(Vec3::new(0.0, 0.0, 1.0));

    /// Projects any non-zero vector onto the sphere.
    pub fn from_vec(v: Vec3) -> Option<Self> {
        v.normalized().map(SpherePoint)
    }

    /// Builds a point from components that must already be unit within [`UNIT_TOL`].
    /// The stored value is renormalized.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vec3::new(x, y, z);
        let n = v.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidCurve(format!("point ({x}, {y}, {z}) has norm {n}, expected 1")));
        }
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(SpherePoint(v));
        }
        Ok(SpherePoint(v * (1.0 / n)))
    }

    /// Point at colatitude `theta` (from +z) and longitude `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint(Vec3::new(st * cp, st * sp, ct))
    }

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }

    #[inline]
    pub fn dot(self, o: SpherePoint) -> f64 {
        self.0.dot(o.0)
    }

    #[inline]
    pub fn antipode(self) -> Self {
        SpherePoint(-self.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.to_array()
    }
}

/// A tangent vector `v` at `base`; its length is the geodesic displacement it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub v: Vec3,
}

impl TangentVector {
    /// Projects `v` onto the tangent plane at `base`.
    pub fn project(base: SpherePoint, v: Vec3) -> Self {
        let p = base.vec();
        TangentVector { base, v: v - p * v.dot(p) }
    }

    pub fn zero(base: SpherePoint) -> Self {
        TangentVector { base, v: Vec3::ZERO }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector { base: self.base, v: self.v * s }
    }
}

/// The great circle `{p : p·normal = 0}`. `normal` and `-normal` give the same
/// point set with opposite orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pub normal: SpherePoint,
}

impl GreatCircle {
    pub fn new(normal: SpherePoint) -> Self {
        GreatCircle { normal }
    }

    pub fn equator() -> Self {
        GreatCircle { normal: SpherePoint::E3 }
    }

    pub fn reversed(self) -> Self {
        GreatCircle { normal: self.normal.antipode() }
    }
}

#[inline]
pub fn geodesic_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    // atan2 form is accurate at both ends of [0, π]; equal to acos of the clamped dot.
    let c = p.vec().cross(q.vec()).norm();
    let d = p.dot(q).clamp(-1.0, 1.0);
    c.atan2(d)
}

/// `cos|v|·p + sin|v|·v/|v|`.
pub fn exp_map(p: SpherePoint, v: Vec3) -> SpherePoint {
    let n = v.norm();
    if n == 0.0 {
        return p;
    }
    let out = p.vec() * n.cos() + v * (n.sin() / n);
    // renormalize to kill drift accumulated over many steps
    SpherePoint::from_vec(out).unwrap_or(p)
}

pub fn exp_map_tangent(t: &TangentVector) -> SpherePoint {
    exp_map(t.base, t.v)
}

/// Inverse of [`exp_map`]: the tangent vector at `p` pointing to `q` with length
/// equal to their geodesic distance.
pub fn log_map(p: SpherePoint, q: SpherePoint) -> Result<TangentVector> {
    let pv = p.vec();
    let w = q.vec() - pv * p.dot(q);
    let wn = w.norm();
    let d = geodesic_distance(p, q);
    if wn < UNIT_TOL {
        if p.dot(q) > 0.0 {
            return Ok(TangentVector::zero(p));
        }
        return Err(Error::AntipodalPair);
    }
    Ok(TangentVector { base: p, v: w * (d / wn) })
}

/// Unit tangent direction at `p` toward `q`, or `None` when `q` is `p` or `-p`.
pub fn direction_to(p: SpherePoint, q: SpherePoint) -> Option<Vec3> {
    let pv = p.vec();
    (q.vec() - pv * p.dot(q)).normalized()
}

/// Point a fraction `t` of the way along the minor arc from `a` to `b`.
pub fn slerp(a: SpherePoint, b: SpherePoint, t: f64) -> SpherePoint {
    let omega = geodesic_distance(a, b);
    if omega < 1e-15 {
        return a;
    }
    let s = omega.sin();
    let fa = ((1.0 - t) * omega).sin() / s;
    let fb = (t * omega).sin() / s;
    SpherePoint::from_vec(a.vec() * fa + b.vec() * fb).unwrap_or(a)
}

/// `|arcsin(p·normal)|`, in `[0, π/2]`.
pub fn distance_to_great_circle(p: SpherePoint, g: &GreatCircle) -> f64 {
    p.dot(g.normal).clamp(-1.0, 1.0).asin().abs()
}

/// A rotation of R³ stored as a 3×3 row-major matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    /// Rotation by `angle` about the unit `axis` (Rodrigues).
    pub fn about_axis(axis: SpherePoint, angle: f64) -> Self {
        let Vec3 { x, y, z } = axis.vec();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Rotation {
            m: [
                [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
                [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
                [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
            ],
        }
    }

    pub fn apply_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        SpherePoint::from_vec(self.apply_vec(p.vec())).expect("rotation preserves norm")
    }
}
