//! Measurement instruments for evolving curves: great-circle fits, the Gage
//! residual, r-multiplicity at a great circle, intersection counts,
//! separation and sidedness, and the discrete Gauss–Bonnet defect.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::curve::{
    arc_boxes, arc_intersection, discrete_curvature, distance_point_to_curve, for_overlapping_arcs,
    left_area_unchecked, left_normal, turning_angles, ArcHit, ClosedSphericalCurve,
};
use crate::error::{Error, Result};
use crate::sphgeo::{distance_to_great_circle, exp_map, GreatCircle, SpherePoint, Vec3};

/// Vertex weights: half the sum of the adjacent edge lengths.
fn vertex_weights(c: &ClosedSphericalCurve) -> Vec<f64> {
    let l = c.edge_lengths();
    let n = l.len();
    (0..n).map(|i| 0.5 * (l[(i + n - 1) % n] + l[i])).collect()
}

fn sorted_eigen(m: Matrix3<f64>) -> [(f64, Vec3); 3] {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (eig.eigenvalues[k], Vec3::new(v[0], v[1], v[2]))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    [pairs[0], pairs[1], pairs[2]]
}

/// Orients `n` so that it lies on the curve's left: the curve circulates
/// counterclockwise around `+n`. Exact ties fall back to a lexicographic sign.
fn orient_to_left(c: &ClosedSphericalCurve, n: Vec3) -> Vec3 {
    let circulation: f64 = (0..c.len())
        .map(|i| {
            let (a, b) = c.edge(i);
            a.vec().cross(b.vec()).dot(n)
        })
        .sum();
    let flip = if circulation != 0.0 {
        circulation < 0.0
    } else {
        let first = [n.x, n.y, n.z].into_iter().find(|v| *v != 0.0).unwrap_or(1.0);
        first < 0.0
    };
    if flip {
        -n
    } else {
        n
    }
}

/// Least-squares great circle: the normal minimizing the edge-length weighted
/// sum of `(pᵢ·n)²`, oriented toward the curve's left side.
pub fn fit_great_circle(c: &ClosedSphericalCurve) -> Result<GreatCircle> {
    let w = vertex_weights(c);
    let mut m = Matrix3::zeros();
    for (p, wi) in c.vertices().iter().zip(&w) {
        let v = nalgebra::Vector3::new(p.vec().x, p.vec().y, p.vec().z);
        m += v * v.transpose() * *wi;
    }
    let [(l0, n), (l1, _), _] = sorted_eigen(m);
    if l1 - l0 < 1e-12 {
        return Err(Error::DegenerateFit);
    }
    let n = orient_to_left(c, n);
    Ok(GreatCircle::new(SpherePoint::from_vec(n).expect("eigenvector is unit")))
}

/// Largest distance from a vertex to the fitted great circle.
pub fn gage_residual(c: &ClosedSphericalCurve) -> Result<f64> {
    let g = fit_great_circle(c)?;
    Ok(c.vertices().iter().map(|&p| distance_to_great_circle(p, &g)).fold(0.0, f64::max))
}

/// A small circle `{p : p·axis = cos(colatitude)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallCircle {
    pub axis: SpherePoint,
    pub colatitude: f64,
}

/// Plane fit through the vertices (weighted, centered): the axis is the
/// smallest-variance direction oriented toward the curve's left side, and
/// `cos(colatitude)` is the mean height along it.
pub fn fit_small_circle(c: &ClosedSphericalCurve) -> Result<SmallCircle> {
    let w = vertex_weights(c);
    let total: f64 = w.iter().sum();
    let mean = c.vertices().iter().zip(&w).fold(Vec3::ZERO, |acc, (p, wi)| acc + p.vec() * *wi) * (1.0 / total);
    let mut m = Matrix3::zeros();
    for (p, wi) in c.vertices().iter().zip(&w) {
        let d = p.vec() - mean;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        m += v * v.transpose() * *wi;
    }
    let [(l0, n), (l1, _), _] = sorted_eigen(m);
    if l1 - l0 < 1e-15 {
        return Err(Error::DegenerateFit);
    }
    let n = orient_to_left(c, n);
    let h = mean.dot(n).clamp(-1.0, 1.0);
    Ok(SmallCircle { axis: SpherePoint::from_vec(n).expect("unit"), colatitude: h.acos() })
}

// ---------------------------------------------------------------------------
// r-multiplicity

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityReport {
    pub value: usize,
    /// `(start_edge, end_edge)` of every maximal arc inside the open 2r band
    /// that reaches the closed r band. An arc that is the whole curve is `(0, n-1)`.
    pub components: Vec<(usize, usize)>,
}

/// Roots in `[0, len]` of `A cos t + B sin t = level`.
fn sinusoid_roots(a: f64, b: f64, level: f64, len: f64, out: &mut Vec<f64>) {
    let amp = a.hypot(b);
    if amp < 1e-300 || level.abs() > amp {
        return;
    }
    let phase = b.atan2(a);
    let base = (level / amp).clamp(-1.0, 1.0).acos();
    for cand in [phase + base, phase - base] {
        for k in -2..=2 {
            let t = cand + TAU * k as f64;
            if (0.0..=len).contains(&t) {
                out.push(t);
            }
        }
    }
}

/// Number of connected components of `c ∩ (g ⊕ 2r)°` that meet `g ⊕ r`.
///
/// Band crossings are located exactly on each edge: along a minor arc the
/// height `p·n` is a sinusoid in arclength.
pub fn r_multiplicity(c: &ClosedSphericalCurve, g: &GreatCircle, r: f64) -> Result<MultiplicityReport> {
    if !(r > 0.0 && r < FRAC_PI_4) {
        return Err(Error::InvalidParams(format!("r = {r} outside (0, π/4)")));
    }
    let nrm = g.normal.vec();
    let outer = (2.0 * r).sin();
    let inner = r.sin();
    let n = c.len();
    for (i, p) in c.vertices().iter().enumerate() {
        if (p.vec().dot(nrm).abs() - outer).abs() < 1e-12 {
            return Err(Error::BandDegenerate(i));
        }
    }

    // Walk the curve as a sequence of sub-intervals tagged (in_band, reaches_inner).
    struct Piece {
        edge: usize,
        in_band: bool,
        inner: bool,
    }
    let mut pieces: Vec<Piece> = Vec::new();
    for i in 0..n {
        let (a, b) = c.edge(i);
        let len = crate::sphgeo::geodesic_distance(a, b);
        let u = crate::sphgeo::direction_to(a, b).unwrap_or(Vec3::ZERO);
        let (ca, cb) = (a.vec().dot(nrm), u.dot(nrm));
        let height = |t: f64| ca * t.cos() + cb * t.sin();
        let mut cuts = vec![0.0, len];
        for level in [outer, -outer] {
            sinusoid_roots(ca, cb, level, len, &mut cuts);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 < 1e-15 {
                continue;
            }
            let in_band = height(0.5 * (t0 + t1)).abs() < outer;
            // min |height| on [t0, t1]: endpoints, a zero crossing, or nothing lower
            let (h0, h1) = (height(t0), height(t1));
            let mut min_abs = h0.abs().min(h1.abs());
            if h0 * h1 < 0.0 {
                min_abs = 0.0;
            }
            pieces.push(Piece { edge: i, in_band, inner: in_band && min_abs <= inner });
        }
    }

    if pieces.iter().all(|p| p.in_band) {
        let reaches = pieces.iter().any(|p| p.inner);
        return Ok(MultiplicityReport {
            value: reaches as usize,
            components: if reaches { vec![(0, n - 1)] } else { vec![] },
        });
    }
    // rotate so the walk starts outside the band
    let start = pieces.iter().position(|p| !p.in_band).expect("some piece outside");
    let m = pieces.len();
    let mut components = Vec::new();
    let mut current: Option<(usize, usize, bool)> = None;
    for k in 0..m {
        let p = &pieces[(start + k) % m];
        match (&mut current, p.in_band) {
            (None, true) => current = Some((p.edge, p.edge, p.inner)),
            (Some(cur), true) => {
                cur.1 = p.edge;
                cur.2 |= p.inner;
            }
            (Some(_), false) => {
                let (s, e, reached) = current.take().expect("open component");
                if reached {
                    components.push((s, e));
                }
            }
            (None, false) => {}
        }
    }
    if let Some((s, e, reached)) = current {
        if reached {
            components.push((s, e));
        }
    }
    Ok(MultiplicityReport { value: components.len(), components })
}

// ---------------------------------------------------------------------------
// Intersections

/// Intersection points of two curves, with tangential or coplanar contacts
/// kept separately.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Intersections {
    pub transversal: Vec<SpherePoint>,
    pub degenerate: Vec<SpherePoint>,
    /// Edge index pairs `(edge of a, edge of b)` of the degenerate contacts.
    pub degenerate_edges: Vec<(usize, usize)>,
}

impl Intersections {
    /// Every contact point, degenerate ones counted once.
    pub fn count(&self) -> usize {
        self.transversal.len() + self.degenerate.len()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.degenerate.is_empty()
    }

    pub fn all_points(&self) -> Vec<SpherePoint> {
        let mut v = self.transversal.clone();
        v.extend_from_slice(&self.degenerate);
        v
    }
}

fn push_dedup(list: &mut Vec<SpherePoint>, p: SpherePoint) -> bool {
    if list.iter().any(|q| crate::sphgeo::geodesic_distance(*q, p) <= 1e-9) {
        return false;
    }
    list.push(p);
    true
}

pub fn find_intersections(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> Intersections {
    let (ba, bb) = (arc_boxes(a), arc_boxes(b));
    let mut hits: Vec<(usize, usize, ArcHit)> = Vec::new();
    for_overlapping_arcs(&ba, &bb, false, |i, j| {
        let (a0, a1) = a.edge(i);
        let (b0, b1) = b.edge(j);
        let hit = arc_intersection(a0, a1, b0, b1);
        if hit != ArcHit::None {
            hits.push((i, j, hit));
        }
        true
    });
    hits.sort_by_key(|h| (h.0, h.1));
    let mut out = Intersections::default();
    for (i, j, hit) in hits {
        match hit {
            ArcHit::Point(p) => {
                if !out.degenerate.iter().any(|q| crate::sphgeo::geodesic_distance(*q, p) <= 1e-9) {
                    push_dedup(&mut out.transversal, p);
                }
            }
            ArcHit::Degenerate(p) => {
                out.transversal.retain(|q| crate::sphgeo::geodesic_distance(*q, p) > 1e-9);
                if push_dedup(&mut out.degenerate, p) {
                    out.degenerate_edges.push((i, j));
                }
            }
            ArcHit::None => {}
        }
    }
    out
}

/// Intersection count with a flag for degenerate (tangential) contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntersectionCount {
    pub count: usize,
    pub degenerate: bool,
}

pub fn intersection_count(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> IntersectionCount {
    let x = find_intersections(a, b);
    IntersectionCount { count: x.count(), degenerate: x.is_degenerate() }
}

/// Minimum geodesic distance between two curves; zero when they meet.
pub fn curve_separation(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> f64 {
    if find_intersections(a, b).count() > 0 {
        return 0.0;
    }
    // for disjoint minor arcs the minimum is attained at an endpoint of one of them
    let ab = a.vertices().iter().map(|&p| distance_point_to_curve(p, b)).fold(f64::INFINITY, f64::min);
    let ba = b.vertices().iter().map(|&p| distance_point_to_curve(p, a)).fold(f64::INFINITY, f64::min);
    ab.min(ba)
}

/// Whether `p` lies strictly in the left region of the simple curve `c`.
///
/// Casts a two-leg geodesic path from `p` to a reference point just left of
/// edge 0 and counts crossings. Points on the curve return `false`.
pub fn is_left_of(c: &ClosedSphericalCurve, p: SpherePoint) -> bool {
    if distance_point_to_curve(p, c) < 1e-12 {
        return false;
    }
    let h = c.min_edge_length();
    let (a, b) = c.edge(0);
    let mid = crate::sphgeo::slerp(a, b, 0.5);
    let nrm = {
        let t = crate::sphgeo::direction_to(mid, b).expect("non-degenerate edge");
        mid.vec().cross(t)
    };
    let reference = exp_map(mid, nrm * (1e-3 * h).min(distance_point_to_curve(p, c) * 0.5).max(1e-10));
    // route through a waypoint to keep every leg a minor arc and off the vertices
    let waypoint = {
        let m = p.vec() + reference.vec();
        let side = p.vec().cross(reference.vec());
        let tilt = side.normalized().unwrap_or(Vec3::new(0.577, 0.577, 0.577)) * 0.013;
        SpherePoint::from_vec(m.normalized().unwrap_or(side) + tilt).expect("non-zero")
    };
    let mut crossings = 0usize;
    for (u, v) in [(p, waypoint), (waypoint, reference)] {
        let len = crate::sphgeo::geodesic_distance(u, v);
        let pieces = (len / 1.0).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let s0 = crate::sphgeo::slerp(u, v, k as f64 / pieces as f64);
            let s1 = crate::sphgeo::slerp(u, v, (k + 1) as f64 / pieces as f64);
            for i in 0..c.len() {
                let (e0, e1) = c.edge(i);
                if arc_intersection(s0, s1, e0, e1) != ArcHit::None {
                    crossings += 1;
                }
            }
        }
    }
    crossings.is_multiple_of(2)
}

/// `Σ ‖κᵢ‖·sign(τᵢ)·ℓ̄ᵢ`, the total geodesic curvature rebuilt from the
/// curvature vectors.
pub fn discrete_total_curvature(c: &ClosedSphericalCurve) -> f64 {
    let w = vertex_weights(c);
    let tau = turning_angles(c);
    discrete_curvature(c).iter().zip(&w).zip(&tau).map(|((k, wi), t)| k.norm() * t.signum() * wi).sum()
}

/// `|Σ ‖κᵢ‖ sign ℓ̄ᵢ − (2π − A_left)|`; zero up to roundoff, since the
/// curvature and the area share their turning angles.
pub fn gauss_bonnet_defect(c: &ClosedSphericalCurve) -> f64 {
    (discrete_total_curvature(c) - (TAU - left_area_unchecked(c))).abs()
}

/// Defect of the discrete total curvature against an externally computed
/// `∮ k_g ds` of the smooth curve the polygon samples.
pub fn gauss_bonnet_defect_against(c: &ClosedSphericalCurve, smooth_total_curvature: f64) -> f64 {
    (discrete_total_curvature(c) - smooth_total_curvature).abs()
}

/// Left normals of every vertex, exposed for offset constructions.
pub fn left_normals(c: &ClosedSphericalCurve) -> Vec<Vec3> {
    (0..c.len()).map(|i| left_normal(c, i)).collect()
}
