//! Discrete closed Jordan curves on the sphere.
//!
//! A curve is a cyclic list of vertices joined by minor great-circle arcs. The
//! orientation is part of the value: the *left* side is the side toward which
//! the curve turns positively, and its area is computed from the discrete
//! Gauss–Bonnet identity `A_left = 2π − Σ τᵢ`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::error::{Error, Result};
use crate::sphgeo::{exp_map, geodesic_distance, slerp, SpherePoint, TangentVector, Vec3, UNIT_TOL};

/// Minimum vertex count for flow-ready curves.
pub const MIN_VERTICES: usize = 8;

/// Sign band for triple products of unit vectors in the arc predicates.
pub const DEGENERACY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSphericalCurve {
    vertices: Vec<SpherePoint>,
}

/// Areas of the two regions bounded by an oriented simple curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaPair {
    pub left: f64,
    pub right: f64,
}

impl AreaPair {
    pub fn min_side(&self) -> f64 {
        self.left.min(self.right)
    }
}

impl ClosedSphericalCurve {
    /// Builds a flow-ready curve: at least [`MIN_VERTICES`] vertices, every edge a
    /// minor arc shorter than π/2.
    pub fn new(vertices: Vec<SpherePoint>) -> Result<Self> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::InvalidCurve(format!("{} vertices, need at least {MIN_VERTICES}", vertices.len())));
        }
        Self::check_edges(&vertices, false)?;
        Ok(Self { vertices })
    }

    /// Relaxed constructor for coarse polygons (at least 3 vertices, edges up to
    /// and including a quarter turn). Used for fixtures like the octant triangle.
    pub fn polygon(vertices: Vec<SpherePoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve("a closed curve needs at least 3 vertices".into()));
        }
        Self::check_edges(&vertices, true)?;
        Ok(Self { vertices })
    }

    /// Caller guarantees unit vertices and valid edges.
    pub(crate) fn from_valid(vertices: Vec<SpherePoint>) -> Self {
        Self { vertices }
    }

    fn check_edges(vertices: &[SpherePoint], allow_quarter: bool) -> Result<()> {
        let n = vertices.len();
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if (a.vec().norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidCurve(format!("vertex {i} is not unit")));
            }
            let d = geodesic_distance(a, b);
            if d < 1e-14 {
                return Err(Error::InvalidCurve(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
            let ok = if allow_quarter { d <= FRAC_PI_2 + 1e-9 } else { d < FRAC_PI_2 };
            if !ok {
                return Err(Error::InvalidCurve(format!("edge {i} has length {d} >= π/2")));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> SpherePoint {
        self.vertices[i % self.vertices.len()]
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclically).
    pub fn edge(&self, i: usize) -> (SpherePoint, SpherePoint) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                geodesic_distance(a, b)
            })
            .collect()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Same point set, opposite orientation.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self { vertices: v }
    }

    /// Applies `f` to every vertex. The result is revalidated with the relaxed rules.
    pub fn map_vertices(&self, f: impl Fn(SpherePoint) -> SpherePoint) -> Result<Self> {
        let v: Vec<_> = self.vertices.iter().copied().map(f).collect();
        Self::check_edges(&v, true)?;
        Ok(Self { vertices: v })
    }

    /// Cyclic shift so that vertex `k` becomes vertex 0.
    pub fn rotated_start(&self, k: usize) -> Self {
        let n = self.len();
        Self { vertices: (0..n).map(|i| self.vertices[(i + k) % n]).collect() }
    }
}

pub fn total_length(c: &ClosedSphericalCurve) -> f64 {
    c.edge_lengths().iter().sum()
}

#[inline]
fn unit_toward(p: Vec3, q: Vec3) -> Vec3 {
    (q - p * p.dot(q)).normalized().unwrap_or(Vec3::ZERO)
}

/// Turning angle and left normal at `p` between neighbours `prev` and `next`.
#[inline]
fn frame(prev: Vec3, p: Vec3, next: Vec3) -> (f64, Vec3) {
    let t_in = -unit_toward(p, prev);
    let t_out = unit_toward(p, next);
    let tau = t_in.cross(t_out).dot(p).atan2(t_in.dot(t_out));
    let t = (t_in + t_out).normalized().unwrap_or(t_out);
    (tau, p.cross(t))
}

/// `(sin τ, cos τ)` up to a common positive factor.
#[inline]
fn turn_sc(prev: Vec3, p: Vec3, next: Vec3) -> (f64, f64) {
    let t_in = p * p.dot(prev) - prev;
    let t_out = next - p * p.dot(next);
    (t_in.cross(t_out).dot(p), t_in.dot(t_out))
}

#[inline]
fn turn(prev: Vec3, p: Vec3, next: Vec3) -> f64 {
    let (y, x) = turn_sc(prev, p, next);
    y.atan2(x)
}

/// Calls `f(i, prev, p, next)` for every vertex.
#[inline]
fn for_each_corner(v: &[SpherePoint], mut f: impl FnMut(usize, Vec3, Vec3, Vec3)) {
    let n = v.len();
    for i in 0..n {
        let prev = if i == 0 { v[n - 1] } else { v[i - 1] };
        let next = if i + 1 == n { v[0] } else { v[i + 1] };
        f(i, prev.vec(), v[i].vec(), next.vec());
    }
}

/// Signed turning angle at vertex `i`; positive for a left turn.
pub fn turning_angle(c: &ClosedSphericalCurve, i: usize) -> f64 {
    let n = c.len();
    turn(c.vertex(i + n - 1).vec(), c.vertex(i).vec(), c.vertex(i + 1).vec())
}

pub fn turning_angles(c: &ClosedSphericalCurve) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    for_each_corner(c.vertices(), |i, a, p, b| out[i] = turn(a, p, b));
    out
}

/// Unit normal at vertex `i` in the tangent plane, pointing to the left of the
/// oriented curve.
pub fn left_normal(c: &ClosedSphericalCurve, i: usize) -> Vec3 {
    let n = c.len();
    frame(c.vertex(i + n - 1).vec(), c.vertex(i).vec(), c.vertex(i + 1).vec()).1
}

/// Left area by Gauss–Bonnet, without checking simplicity.
pub fn left_area_unchecked(c: &ClosedSphericalCurve) -> f64 {
    TAU - turning_angles(c).iter().sum::<f64>()
}

pub fn enclosed_areas(c: &ClosedSphericalCurve) -> Result<AreaPair> {
    if !is_simple(c) {
        return Err(Error::NonSimpleCurve);
    }
    let left = left_area_unchecked(c);
    Ok(AreaPair { left, right: 2.0 * TAU - left })
}

pub fn is_bisector(c: &ClosedSphericalCurve, tol: f64) -> Result<bool> {
    Ok((enclosed_areas(c)?.left - TAU).abs() <= tol)
}

/// Curvature vectors together with `Σ τᵢ` and the largest magnitude.
pub(crate) struct CurvaturePass {
    pub vectors: Vec<TangentVector>,
    pub total_turning: f64,
    pub max_norm: f64,
    pub min_edge: f64,
    pub length: f64,
    /// Unit left normals.
    pub normals: Vec<Vec3>,
}

pub(crate) fn curvature_pass(c: &ClosedSphericalCurve) -> CurvaturePass {
    let lengths = c.edge_lengths();
    let n = c.len();
    let mut vectors = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let (mut total_turning, mut max_norm) = (0.0, 0.0f64);
    for_each_corner(c.vertices(), |i, a, p, b| {
        let (tau, normal) = frame(a, p, b);
        normals.push(normal);
        let prev_len = if i == 0 { lengths[n - 1] } else { lengths[i - 1] };
        let k = tau / (0.5 * (prev_len + lengths[i]));
        total_turning += tau;
        max_norm = max_norm.max(k.abs());
        vectors.push(TangentVector { base: c.vertices()[i], v: normal * k });
    });
    let min_edge = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let length = lengths.iter().sum();
    CurvaturePass { vectors, total_turning, max_norm, min_edge, length, normals }
}

/// Geodesic curvature vector at every vertex: magnitude `τᵢ / ((ℓᵢ₋₁ + ℓᵢ)/2)`
/// along the left normal, so it always points toward the side the curve bends to.
pub fn discrete_curvature(c: &ClosedSphericalCurve) -> Vec<TangentVector> {
    curvature_pass(c).vectors
}

// ---------------------------------------------------------------------------
// Arc predicates

/// Outcome of intersecting two minor arcs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcHit {
    None,
    Point(SpherePoint),
    /// Coplanar arcs, or an endpoint within the degeneracy band of the other plane.
    Degenerate(SpherePoint),
}

#[inline]
fn band_sign(x: f64) -> i8 {
    if x > DEGENERACY_BAND {
        1
    } else if x < -DEGENERACY_BAND {
        -1
    } else {
        0
    }
}

/// Intersection of minor arcs `a0→a1` and `b0→b1`.
pub fn arc_intersection(a0: SpherePoint, a1: SpherePoint, b0: SpherePoint, b1: SpherePoint) -> ArcHit {
    let (Some(na), Some(nb)) = (a0.vec().cross(a1.vec()).normalized(), b0.vec().cross(b1.vec()).normalized()) else {
        return ArcHit::None;
    };
    let s0 = band_sign(na.dot(b0.vec()));
    let s1 = band_sign(na.dot(b1.vec()));
    let t0 = band_sign(nb.dot(a0.vec()));
    let t1 = band_sign(nb.dot(a1.vec()));
    if s0 * s1 > 0 || t0 * t1 > 0 {
        return ArcHit::None;
    }
    let degenerate = s0 == 0 || s1 == 0 || t0 == 0 || t1 == 0;
    match na.cross(nb).normalized() {
        Some(x) => {
            let mid_a = a0.vec() + a1.vec();
            let x = if x.dot(mid_a) < 0.0 { -x } else { x };
            if x.dot(b0.vec() + b1.vec()) <= 0.0 {
                return ArcHit::None;
            }
            let p = SpherePoint::from_vec(x).expect("unit");
            if degenerate {
                ArcHit::Degenerate(p)
            } else {
                ArcHit::Point(p)
            }
        }
        None => {
            // same great circle: overlapping iff some endpoint lies on the other arc
            let on = |p: SpherePoint, u: SpherePoint, v: SpherePoint| {
                (geodesic_distance(u, p) + geodesic_distance(p, v) - geodesic_distance(u, v)).abs() < 1e-12
            };
            for (p, u, v) in [(b0, a0, a1), (b1, a0, a1), (a0, b0, b1), (a1, b0, b1)] {
                if on(p, u, v) {
                    return ArcHit::Degenerate(p);
                }
            }
            ArcHit::None
        }
    }
}

/// Axis-aligned box containing a minor arc.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArcBox {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl ArcBox {
    pub(crate) fn of(a: SpherePoint, b: SpherePoint) -> Self {
        let (av, bv) = (a.vec().to_array(), b.vec().to_array());
        // the arc bulges outward from the chord by at most 1 − cos(ℓ/2)
        let chord_half = 0.5 * (a.vec() - b.vec()).norm();
        let sag = 1.0 - (1.0 - chord_half * chord_half).max(0.0).sqrt() + 1e-12;
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..3 {
            lo[k] = av[k].min(bv[k]) - sag;
            hi[k] = av[k].max(bv[k]) + sag;
        }
        ArcBox { lo, hi }
    }

    #[inline]
    fn overlaps(&self, o: &ArcBox) -> bool {
        (0..3).all(|k| self.lo[k] <= o.hi[k] && o.lo[k] <= self.hi[k])
    }
}

/// Calls `f(i, j)` for every pair of arcs (one from each list) whose boxes
/// overlap; sweep-and-prune along x. With `same` set, the lists are the same
/// and each unordered pair `i < j` is visited once.
pub(crate) fn for_overlapping_arcs(
    boxes_a: &[ArcBox],
    boxes_b: &[ArcBox],
    same: bool,
    mut f: impl FnMut(usize, usize) -> bool,
) -> bool {
    // entries: (lo_x, list, index)
    let mut order: Vec<(f64, u8, usize)> = boxes_a.iter().enumerate().map(|(i, b)| (b.lo[0], 0u8, i)).collect();
    if !same {
        order.extend(boxes_b.iter().enumerate().map(|(i, b)| (b.lo[0], 1u8, i)));
    }
    order.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let get = |list: u8, i: usize| if list == 0 { &boxes_a[i] } else { &boxes_b[i] };
    for (k, &(_, li, i)) in order.iter().enumerate() {
        let bi = get(li, i);
        for &(lo_x, lj, j) in &order[k + 1..] {
            if lo_x > bi.hi[0] {
                break;
            }
            if !same && li == lj {
                continue;
            }
            if !bi.overlaps(get(lj, j)) {
                continue;
            }
            let keep_going = if same {
                f(i.min(j), i.max(j))
            } else if li == 0 {
                f(i, j)
            } else {
                f(j, i)
            };
            if !keep_going {
                return false;
            }
        }
    }
    true
}

pub(crate) fn arc_boxes(c: &ClosedSphericalCurve) -> Vec<ArcBox> {
    (0..c.len())
        .map(|i| {
            let (a, b) = c.edge(i);
            ArcBox::of(a, b)
        })
        .collect()
}

/// True iff no two non-adjacent edges meet (a vertex on a non-incident edge
/// counts as meeting) and no adjacent pair folds back on itself. Degenerate
/// configurations are reported as non-simple.
pub fn is_simple(c: &ClosedSphericalCurve) -> bool {
    // |τ| > π − 1e-9, without the atan2
    let fold_tan = (1e-9f64).tan();
    let mut folded = false;
    for_each_corner(c.vertices(), |_, a, p, b| {
        let (y, x) = turn_sc(a, p, b);
        folded |= x < 0.0 && y.abs() < fold_tan * -x;
    });
    !folded && no_crossings(c)
}

/// Left area of `c`, or `None` if `c` is not simple.
pub(crate) fn simple_left_area(c: &ClosedSphericalCurve) -> Option<f64> {
    let mut total = 0.0;
    let mut folded = false;
    for_each_corner(c.vertices(), |_, a, p, b| {
        let tau = turn(a, p, b);
        folded |= tau.abs() > PI - 1e-9;
        total += tau;
    });
    (!folded && no_crossings(c)).then_some(TAU - total)
}

fn no_crossings(c: &ClosedSphericalCurve) -> bool {
    let n = c.len();
    let boxes = arc_boxes(c);
    for_overlapping_arcs(&boxes, &boxes, true, |i, j| {
        if j == i + 1 || (i == 0 && j == n - 1) {
            return true;
        }
        let (a0, a1) = c.edge(i);
        let (b0, b1) = c.edge(j);
        matches!(arc_intersection(a0, a1, b0, b1), ArcHit::None)
    })
}

// ---------------------------------------------------------------------------
// Resampling and offsets

/// `n` vertices equally spaced in arclength along the geodesic polyline, the
/// first one at the first input vertex.
pub fn resample(c: &ClosedSphericalCurve, n: usize) -> Result<ClosedSphericalCurve> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("cannot resample to {n} vertices")));
    }
    ClosedSphericalCurve::polygon(resample_points(c.vertices(), &c.edge_lengths(), n))
}

pub(crate) fn resample_points(v: &[SpherePoint], lengths: &[f64], n: usize) -> Vec<SpherePoint> {
    let total: f64 = lengths.iter().sum();
    let step = total / n as f64;
    let m = v.len();
    let mut out = Vec::with_capacity(n);
    let mut edge = 0usize;
    let mut edge_start = 0.0;
    let mut sin_len = lengths[0].sin();
    for j in 0..n {
        let s = j as f64 * step;
        while edge + 1 < m && edge_start + lengths[edge] <= s {
            edge_start += lengths[edge];
            edge += 1;
            sin_len = lengths[edge].sin();
        }
        let (a, b) = (v[edge], v[(edge + 1) % m]);
        let omega = lengths[edge];
        if omega < 1e-15 {
            out.push(a);
            continue;
        }
        let frac = ((s - edge_start) / omega).clamp(0.0, 1.0);
        let fa = ((1.0 - frac) * omega).sin() / sin_len;
        let fb = (frac * omega).sin() / sin_len;
        out.push(SpherePoint::from_vec(a.vec() * fa + b.vec() * fb).unwrap_or(a));
    }
    out
}

/// Moves every vertex by the signed geodesic distance `s` along its left normal.
pub fn normal_offset(c: &ClosedSphericalCurve, s: f64) -> Result<ClosedSphericalCurve> {
    let moved: Vec<_> = (0..c.len()).map(|i| exp_map(c.vertex(i), left_normal(c, i) * s)).collect();
    ClosedSphericalCurve::polygon(moved)
}

/// Maximum bisection iterations for [`make_bisector`].
const BISECTOR_MAX_ITERS: usize = 60;

/// Uniform normal offset of `c` whose left area is 2π.
///
/// The offset `s` is bracketed in `[-π/4, π/4]`; bracket ends that make the
/// curve non-simple are pulled in by halving before the root is bisected.
pub fn make_bisector(c: &ClosedSphericalCurve) -> Result<ClosedSphericalCurve> {
    let left0 = enclosed_areas(c)?.left;
    let excess = |s: f64| -> Option<(f64, ClosedSphericalCurve)> {
        let off = normal_offset(c, s).ok()?;
        if !is_simple(&off) {
            return None;
        }
        Some((left_area_unchecked(&off) - TAU, off))
    };
    if (left0 - TAU).abs() <= 1e-12 {
        return Ok(c.clone());
    }
    // positive offsets shrink the left side
    let toward = if left0 > TAU { 1.0 } else { -1.0 };
    let mut far = toward * FRAC_PI_4;
    let mut far_val = None;
    for _ in 0..40 {
        if let Some((v, _)) = excess(far) {
            far_val = Some(v);
            break;
        }
        far *= 0.5;
    }
    let Some(far_val) = far_val else {
        return Err(Error::OffsetMakesNonSimple);
    };
    let near_val = left0 - TAU;
    if near_val.signum() == far_val.signum() {
        return Err(Error::RootNotBracketed);
    }
    let (mut lo, mut hi) = (0.0, far);
    let mut best = None;
    for _ in 0..BISECTOR_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let Some((v, off)) = excess(mid) else {
            return Err(Error::OffsetMakesNonSimple);
        };
        let done = v.abs() <= 1e-11;
        if v.signum() == near_val.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        best = Some((v, off));
        if done {
            break;
        }
    }
    let (v, off) = best.expect("at least one iteration");
    if v.abs() > 1e-8 {
        return Err(Error::RootNotBracketed);
    }
    Ok(off)
}

// ---------------------------------------------------------------------------
// Distances to curves

/// Geodesic distance from `p` to the minor arc `a→b`.
pub fn distance_point_to_arc(p: SpherePoint, a: SpherePoint, b: SpherePoint) -> f64 {
    let pv = p.vec();
    if let Some(n) = a.vec().cross(b.vec()).normalized() {
        let h = pv.dot(n);
        let foot = pv - n * h;
        if let Some(q) = foot.normalized() {
            let inside = a.vec().cross(q).dot(n) >= 0.0 && q.cross(b.vec()).dot(n) >= 0.0;
            if inside {
                return h.abs().atan2(foot.norm());
            }
        }
    }
    geodesic_distance(p, a).min(geodesic_distance(p, b))
}

pub fn distance_point_to_curve(p: SpherePoint, c: &ClosedSphericalCurve) -> f64 {
    (0..c.len())
        .map(|i| {
            let (a, b) = c.edge(i);
            distance_point_to_arc(p, a, b)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Vertices of `c` plus interior samples on every edge, spaced at most `res` apart.
pub fn dense_samples(c: &ClosedSphericalCurve, res: f64) -> Vec<SpherePoint> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        let (a, b) = c.edge(i);
        let k = (geodesic_distance(a, b) / res).ceil().max(1.0) as usize;
        out.extend((0..k).map(|j| slerp(a, b, j as f64 / k as f64)));
    }
    out
}

/// Whether `a ⊆ b ⊕ δ`, checked on vertices and edge samples at resolution δ/4.
pub fn curve_in_dilation(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve, delta: f64) -> bool {
    let res = (delta / 4.0).max(1e-6);
    dense_samples(a, res).into_iter().all(|p| distance_point_to_curve(p, b) <= delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen_latitude_circle;
    use approx::assert_abs_diff_eq;

    fn sp(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new(x, y, z).unwrap()
    }

    fn equator_square() -> ClosedSphericalCurve {
        ClosedSphericalCurve::polygon(vec![
            sp(1.0, 0.0, 0.0),
            sp(0.0, 1.0, 0.0),
            sp(-1.0, 0.0, 0.0),
            sp(0.0, -1.0, 0.0),
        ])
        .unwrap()
    }

    fn octant() -> ClosedSphericalCurve {
        ClosedSphericalCurve::polygon(vec![SpherePoint::E1, SpherePoint::E2, SpherePoint::E3]).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(ClosedSphericalCurve::new(equator_square().vertices().to_vec()).is_err());
        let mut v = gen_latitude_circle(1.0, 16).vertices().to_vec();
        v[3] = v[2];
        assert!(ClosedSphericalCurve::new(v).is_err());
    }

    #[test]
    fn square_length() {
        assert_abs_diff_eq!(total_length(&equator_square()), TAU, epsilon = 1e-14);
    }

    #[test]
    fn inscribed_polygon_length_approaches_from_below() {
        // chord-to-arc: n edges of length 2π/n exactly (geodesic edges lie on the equator)
        // so check a small circle: n·2·asin(sin θ·sin(π/n)) against 2π sin θ
        let theta = 1.0f64;
        let mut prev = 0.0;
        for n in [16usize, 32, 64, 128] {
            let c = gen_latitude_circle(theta, n);
            let l = total_length(&c);
            let expected = n as f64 * 2.0 * (theta.sin() * (PI / n as f64).sin()).asin();
            assert_abs_diff_eq!(l, expected, epsilon = 1e-12);
            assert!(l < TAU * theta.sin());
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn square_and_octant_areas() {
        let a = enclosed_areas(&equator_square()).unwrap();
        assert_abs_diff_eq!(a.left, TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(a.right, TAU, epsilon = 1e-12);
        let o = enclosed_areas(&octant()).unwrap();
        assert_abs_diff_eq!(o.left, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(o.right, 3.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn cap_area_oracle() {
        for theta in [0.3, 1.0, 2.0] {
            let c = gen_latitude_circle(theta, 2048);
            let a = enclosed_areas(&c).unwrap();
            let cap = TAU * (1.0 - f64::cos(theta));
            assert_abs_diff_eq!(a.left, cap, epsilon = 1e-4);
            assert_abs_diff_eq!(a.right, TAU * (1.0 + f64::cos(theta)), epsilon = 1e-4);
        }
    }

    #[test]
    fn reversal_swaps_areas() {
        let c = gen_latitude_circle(0.8, 64);
        let a = enclosed_areas(&c).unwrap();
        let r = enclosed_areas(&c.reversed()).unwrap();
        assert_abs_diff_eq!(a.left, r.right, epsilon = 1e-12);
        assert_abs_diff_eq!(a.right, r.left, epsilon = 1e-12);
    }

    #[test]
    fn simplicity() {
        assert!(is_simple(&equator_square()));
        for theta in [0.1, 1.0, 2.5] {
            assert!(is_simple(&gen_latitude_circle(theta, 100)));
        }
        // figure eight: two lobes traversed through the crossing at e1
        let mut pts = Vec::new();
        for k in 0..16 {
            let a = TAU * k as f64 / 16.0;
            // lemniscate-like curve in the tangent plane at e1, mapped to the sphere
            let (y, z) = (0.4 * a.sin(), 0.2 * (2.0 * a).sin());
            pts.push(SpherePoint::from_vec(Vec3::new(1.0, y, z)).unwrap());
        }
        let eight = ClosedSphericalCurve::new(pts).unwrap();
        assert!(!is_simple(&eight));
        assert!(brute_force_has_crossing(&eight));
        assert_eq!(enclosed_areas(&eight), Err(Error::NonSimpleCurve));
    }

    fn brute_force_has_crossing(c: &ClosedSphericalCurve) -> bool {
        let n = c.len();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a0, a1) = c.edge(i);
                let (b0, b1) = c.edge(j);
                if arc_intersection(a0, a1, b0, b1) != ArcHit::None {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn sweep_agrees_with_all_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(8..30);
            let pts: Vec<_> = (0..n)
                .map(|k| {
                    let phi = TAU * k as f64 / n as f64;
                    let theta = 1.3 + rng.gen_range(-0.5..0.5);
                    SpherePoint::from_spherical(theta, phi + rng.gen_range(-0.5..0.5))
                })
                .collect();
            let Ok(c) = ClosedSphericalCurve::new(pts) else { continue };
            let folds = (0..n).any(|i| turning_angle(&c, i).abs() > PI - 1e-9);
            assert_eq!(is_simple(&c), !folds && !brute_force_has_crossing(&c));
        }
    }

    #[test]
    fn arc_intersection_basics() {
        let hit = arc_intersection(
            SpherePoint::from_spherical(FRAC_PI_2, -0.1),
            SpherePoint::from_spherical(FRAC_PI_2, 0.1),
            SpherePoint::from_spherical(FRAC_PI_2 - 0.1, 0.0),
            SpherePoint::from_spherical(FRAC_PI_2 + 0.1, 0.0),
        );
        match hit {
            ArcHit::Point(p) => assert!(geodesic_distance(p, SpherePoint::E1) < 1e-14),
            other => panic!("{other:?}"),
        }
        // same configuration on the far side does not meet
        let miss = arc_intersection(
            SpherePoint::from_spherical(FRAC_PI_2, -0.1),
            SpherePoint::from_spherical(FRAC_PI_2, 0.1),
            SpherePoint::from_spherical(FRAC_PI_2 - 0.1, PI),
            SpherePoint::from_spherical(FRAC_PI_2 + 0.1, PI),
        );
        assert_eq!(miss, ArcHit::None);
    }

    #[test]
    fn resample_examples() {
        let sq = equator_square();
        let r = resample(&sq, 4).unwrap();
        for (a, b) in r.vertices().iter().zip(sq.vertices()) {
            assert!(geodesic_distance(*a, *b) < 1e-14);
        }
        let c = gen_latitude_circle(1.1, 64);
        let once = resample(&c, 128).unwrap();
        for p in once.vertices() {
            // vertices land on the chords, which dip below the circle by the sagitta
            assert_abs_diff_eq!(p.vec().z.acos(), 1.1, epsilon = 1e-3);
        }
        let same_n = resample(&c, 64).unwrap();
        for p in same_n.vertices() {
            assert_abs_diff_eq!(p.vec().z.acos(), 1.1, epsilon = 1e-6);
        }
        let twice = resample(&same_n, 64).unwrap();
        for (a, b) in twice.vertices().iter().zip(same_n.vertices()) {
            assert!(geodesic_distance(*a, *b) < 1e-10);
        }
    }

    #[test]
    fn resample_preserves_length_and_area() {
        let c = crate::harness::gen_perturbed_bisector(&crate::harness::PerturbationSpec::flower(256, 0.2, &[3, 5], 1))
            .unwrap();
        let r = resample(&c, 256).unwrap();
        let (l0, l1) = (total_length(&c), total_length(&r));
        assert!(l1 <= l0 + 1e-12 && l0 - l1 < 1e-3);
        assert_abs_diff_eq!(left_area_unchecked(&c), left_area_unchecked(&r), epsilon = 1e-5);
    }

    #[test]
    fn curvature_of_equator_vanishes() {
        let c = gen_latitude_circle(FRAC_PI_2, 64);
        for k in discrete_curvature(&c) {
            assert!(k.norm() < 1e-12);
        }
    }

    #[test]
    fn curvature_of_latitude_circle() {
        for theta in [0.5, 1.0, 2.2] {
            let c = gen_latitude_circle(theta, 512);
            let cot = 1.0 / f64::tan(theta);
            for k in discrete_curvature(&c) {
                assert_abs_diff_eq!(k.norm(), cot.abs(), epsilon = 1e-3);
                assert!(k.v.dot(k.base.vec()).abs() < 1e-12);
                // toward the nearer pole
                assert_eq!(k.v.z > 0.0, theta < FRAC_PI_2);
            }
        }
    }

    #[test]
    fn curvature_converges_at_second_order() {
        let theta = 0.9f64;
        let err = |n| {
            discrete_curvature(&gen_latitude_circle(theta, n))
                .iter()
                .map(|k| (k.norm() - 1.0 / theta.tan()).abs())
                .fold(0.0, f64::max)
        };
        for n in [32, 64, 128] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio} at n = {n}");
        }
    }

    #[test]
    fn curvature_vector_is_orientation_independent() {
        let c = crate::harness::gen_perturbed_bisector(&crate::harness::PerturbationSpec::flower(64, 0.2, &[2], 0))
            .unwrap();
        let k = discrete_curvature(&c);
        let r = discrete_curvature(&c.reversed());
        let n = c.len();
        for i in 0..n {
            let d = k[i].v - r[n - 1 - i].v;
            assert!(d.norm() < 1e-9);
        }
    }

    #[test]
    fn bisector_predicate() {
        assert!(is_bisector(&equator_square(), 1e-9).unwrap());
        assert!(!is_bisector(&octant(), 1e-3).unwrap());
    }

    #[test]
    fn make_bisector_examples() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        let b = make_bisector(&eq).unwrap();
        for (p, q) in b.vertices().iter().zip(eq.vertices()) {
            assert!(geodesic_distance(*p, *q) < 1e-6);
        }

        let cap = gen_latitude_circle(PI / 3.0, 256);
        let b = make_bisector(&cap).unwrap();
        assert!(is_bisector(&b, 1e-8).unwrap());
        assert!(is_simple(&b));
        // the 2π-area regular polygon sits a sagitta north of the true equator
        for p in b.vertices() {
            assert_abs_diff_eq!(p.vec().z.acos(), FRAC_PI_2, epsilon = 1e-4);
        }
    }

    #[test]
    fn make_bisector_on_perturbed_great_circle() {
        let pts: Vec<_> = (0..128)
            .map(|k| {
                let phi = TAU * k as f64 / 128.0;
                SpherePoint::from_spherical(FRAC_PI_2 - 0.2 * (2.0 * phi).cos() - 0.05, phi)
            })
            .collect();
        let c = ClosedSphericalCurve::new(pts).unwrap();
        assert!(!is_bisector(&c, 1e-3).unwrap());
        let b = make_bisector(&c).unwrap();
        assert!(is_bisector(&b, 1e-8).unwrap());
    }

    #[test]
    fn make_bisector_errors() {
        // a tiny cap needs more than π/4 of offset
        let c = gen_latitude_circle(0.2, 64);
        assert!(matches!(make_bisector(&c), Err(Error::RootNotBracketed) | Err(Error::OffsetMakesNonSimple)));
    }

    #[test]
    fn point_to_curve() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        assert_eq!(distance_point_to_curve(eq.vertex(5), &eq), 0.0);
        assert_abs_diff_eq!(distance_point_to_curve(SpherePoint::E3, &eq), FRAC_PI_2, epsilon = 1e-9);
        let p = SpherePoint::from_spherical(FRAC_PI_2 - 0.1, 0.37);
        assert_abs_diff_eq!(distance_point_to_curve(p, &eq), 0.1, epsilon = 1e-9);
    }

    #[test]
    fn dilation_examples() {
        let eq = gen_latitude_circle(FRAC_PI_2, 128);
        let lat = gen_latitude_circle(FRAC_PI_2 - 0.1, 128);
        assert!(curve_in_dilation(&eq, &eq, 0.01));
        assert!(!curve_in_dilation(&lat, &eq, 0.05));
        assert!(curve_in_dilation(&lat, &eq, 0.2));
    }
}
