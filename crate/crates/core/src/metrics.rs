//! Fréchet and Hausdorff distances between closed curves on the sphere.
//!
//! The Fréchet distance is the discrete (vertex-coupling) variant, minimized
//! over the cyclic start of one operand and over its orientation. Ground
//! distance is geodesic everywhere.

use rayon::prelude::*;

use std::f64::consts::PI;

use crate::curve::{dense_samples, distance_point_to_arc, ClosedSphericalCurve};
use crate::sphgeo::{geodesic_distance, SpherePoint, Vec3};

/// Default edge-sampling resolution for [`hausdorff_distance`], in radians.
pub const HAUSDORFF_RESOLUTION: f64 = 1e-3;

/// An optimal cyclic coupling between two vertex cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingResult {
    pub distance: f64,
    /// Index pairs `(i, j)` into the original (unshifted, unreversed) vertex lists.
    /// The walk starts and ends at the same pair.
    pub alignment: Vec<(usize, usize)>,
    pub orientation_flipped: bool,
    /// Index of `b`'s vertex coupled to `a[0]` at the start of the walk.
    pub shift: usize,
}

pub fn frechet_distance(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> CouplingResult {
    frechet_cycles(a.vertices(), b.vertices())
}

/// Maps a position `j` in the walk over `b` (0..=nb) to an index of `b`.
#[inline]
fn b_index(j: usize, shift: usize, flipped: bool, nb: usize) -> usize {
    let j = j % nb;
    if flipped {
        (shift + nb - j) % nb
    } else {
        (shift + j) % nb
    }
}

/// Value of the monotone-coupling DP for one shift/orientation of `b`.
/// Both cycles are closed by repeating their first element.
fn coupling_value(dist: &[Vec<f64>], shift: usize, flipped: bool) -> f64 {
    let na = dist.len();
    let nb = dist[0].len();
    let mut prev = vec![0.0f64; nb + 1];
    let mut cur = vec![0.0f64; nb + 1];
    for i in 0..=na {
        let row = &dist[i % na];
        for j in 0..=nb {
            let d = row[b_index(j, shift, flipped, nb)];
            let best_prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = d.max(best_prev);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[nb]
}

fn coupling_path(dist: &[Vec<f64>], shift: usize, flipped: bool) -> Vec<(usize, usize)> {
    let na = dist.len();
    let nb = dist[0].len();
    let d = |i: usize, j: usize| dist[i % na][b_index(j, shift, flipped, nb)];
    let mut table = vec![vec![0.0f64; nb + 1]; na + 1];
    for i in 0..=na {
        for j in 0..=nb {
            let best_prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => table[0][j - 1],
                (_, 0) => table[i - 1][0],
                _ => table[i - 1][j].min(table[i][j - 1]).min(table[i - 1][j - 1]),
            };
            table[i][j] = d(i, j).max(best_prev);
        }
    }
    let (mut i, mut j) = (na, nb);
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let cands = [(i - 1, j - 1), (i - 1, j), (i, j - 1)];
            *cands.iter().min_by(|x, y| table[x.0][x.1].total_cmp(&table[y.0][y.1])).expect("three candidates")
        };
        path.push((i, j));
    }
    path.reverse();
    path.into_iter().map(|(i, j)| (i % na, b_index(j, shift, flipped, nb))).collect()
}

/// Discrete Fréchet distance between two vertex cycles.
///
/// Works on raw point lists so that very short cycles (down to one vertex) can
/// be checked against exhaustive enumeration. Cost is `O(2·nb·na·nb)`; for
/// large inputs resample both curves first.
pub fn frechet_cycles(a: &[SpherePoint], b: &[SpherePoint]) -> CouplingResult {
    assert!(!a.is_empty() && !b.is_empty(), "empty vertex cycle");
    let nb = b.len();
    let dist: Vec<Vec<f64>> = a.iter().map(|&p| b.iter().map(|&q| geodesic_distance(p, q)).collect()).collect();
    let candidates: Vec<(bool, usize)> = [false, true].into_iter().flat_map(|f| (0..nb).map(move |s| (f, s))).collect();
    let (value, flipped, shift) = candidates
        .par_iter()
        .map(|&(f, s)| (coupling_value(&dist, s, f), f, s))
        // ties resolve to the first candidate in input order, independent of scheduling
        .reduce(
            || (f64::INFINITY, true, usize::MAX),
            |x, y| {
                let key = |t: &(f64, bool, usize)| (t.1 as u8, t.2);
                match x.0.total_cmp(&y.0) {
                    std::cmp::Ordering::Less => x,
                    std::cmp::Ordering::Greater => y,
                    std::cmp::Ordering::Equal => {
                        if key(&x) <= key(&y) {
                            x
                        } else {
                            y
                        }
                    }
                }
            },
        );
    CouplingResult {
        distance: value,
        alignment: coupling_path(&dist, shift, flipped),
        orientation_flipped: flipped,
        shift,
    }
}

/// Edge midpoints and the largest half-length, for pruning point-to-curve queries.
struct EdgeCaps {
    mids: Vec<Vec3>,
    half: f64,
}

impl EdgeCaps {
    fn of(c: &ClosedSphericalCurve) -> Self {
        let mut half = 0.0f64;
        let mids = (0..c.len())
            .map(|i| {
                let (x, y) = c.edge(i);
                half = half.max(0.5 * geodesic_distance(x, y));
                (x.vec() + y.vec()).normalized().unwrap_or(x.vec())
            })
            .collect();
        EdgeCaps { mids, half }
    }
}

/// Distance from `p` to `c`, starting from edge `hint`; returns the nearest edge too.
fn nearest_on_curve(p: SpherePoint, c: &ClosedSphericalCurve, caps: &EdgeCaps, hint: usize) -> (f64, usize) {
    let (x, y) = c.edge(hint);
    let mut best = distance_point_to_arc(p, x, y);
    let mut best_i = hint;
    // every point of edge i is within `half` of its midpoint
    let mut threshold = (best + caps.half).min(PI).cos();
    for (i, m) in caps.mids.iter().enumerate() {
        if i == hint || p.vec().dot(*m) < threshold {
            continue;
        }
        let (x, y) = c.edge(i);
        let d = distance_point_to_arc(p, x, y);
        if d < best {
            best = d;
            best_i = i;
            threshold = (best + caps.half).min(PI).cos();
        }
    }
    (best, best_i)
}

/// One-sided Hausdorff distance `sup_{p∈a} d(p, b)` with `a`'s edges sampled at `res`.
pub fn directed_hausdorff(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve, res: f64) -> f64 {
    let caps = EdgeCaps::of(b);
    let samples = dense_samples(a, res);
    let chunk = 1024;
    samples
        .par_chunks(chunk)
        .map(|ps| {
            let mut hint = 0;
            let mut worst = 0.0f64;
            for &p in ps {
                let (d, i) = nearest_on_curve(p, b, &caps, hint);
                hint = i;
                worst = worst.max(d);
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

pub fn hausdorff_distance_with(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve, res: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    directed_hausdorff(a, b, res).max(directed_hausdorff(b, a, res))
}

pub fn hausdorff_distance(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> f64 {
    hausdorff_distance_with(a, b, HAUSDORFF_RESOLUTION)
}
