//! Explicit curve-shortening flow on the sphere.
//!
//! Each step moves every vertex along its discrete geodesic curvature vector
//! by the exponential map and then resamples uniformly in arclength. Several
//! curves can be advanced on one shared time grid.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::analysis::{find_intersections, gage_residual};
use crate::curve::{
    curvature_pass, discrete_curvature, is_simple, left_area_unchecked, normal_offset, resample, resample_points,
    simple_left_area, total_length, ClosedSphericalCurve, CurvaturePass,
};
use crate::error::{Error, Result};
use crate::sphgeo::{exp_map, geodesic_distance, SpherePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    /// `dt = cfl_factor · h_min²`; in `(0, 0.5]`.
    pub cfl_factor: f64,
    pub resample_n: usize,
    pub t_end: f64,
    pub record_every: usize,
    /// Stop once the smaller side area drops below this (steradians).
    pub singular_area: f64,
    /// Stop once any vertex curvature exceeds this.
    pub max_curvature: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            cfl_factor: 0.25,
            resample_n: 256,
            t_end: 1.0,
            record_every: 50,
            singular_area: 1e-3,
            max_curvature: 1e3,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 0.5) {
            return bad(format!("cfl_factor {} not in (0, 0.5]", self.cfl_factor));
        }
        if self.resample_n < 32 {
            return bad(format!("resample_n {} < 32", self.resample_n));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end {} must be finite and non-negative", self.t_end));
        }
        if self.record_every == 0 {
            return bad("record_every must be positive".into());
        }
        if !(self.singular_area > 0.0) {
            return bad("singular_area must be positive".into());
        }
        if !(self.max_curvature > 0.0) {
            return bad("max_curvature must be positive".into());
        }
        Ok(())
    }

    pub fn with_t_end(&self, t_end: f64) -> Self {
        FlowParams { t_end, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub length: f64,
    pub area_left: f64,
    pub max_abs_curvature: f64,
    /// `None` when the great-circle fit is degenerate.
    pub gage_residual: Option<f64>,
}

impl DiagnosticsRecord {
    pub fn of(c: &ClosedSphericalCurve) -> Self {
        DiagnosticsRecord {
            length: total_length(c),
            area_left: left_area_unchecked(c),
            max_abs_curvature: discrete_curvature(c).iter().map(|k| k.norm()).fold(0.0, f64::max),
            gage_residual: gage_residual(c).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalStatus {
    ReachedEnd,
    Singular(f64),
    NonSimple(f64),
}

impl TerminalStatus {
    pub fn label(&self) -> String {
        match self {
            TerminalStatus::ReachedEnd => "ReachedEnd".to_string(),
            TerminalStatus::Singular(t) => format!("Singular({t})"),
            TerminalStatus::NonSimple(t) => format!("NonSimple({t})"),
        }
    }
}

/// Time-stamped curves of one flow, one entry per record time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub curves: Vec<ClosedSphericalCurve>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub terminal_status: TerminalStatus,
}

impl Trajectory {
    pub fn last_curve(&self) -> &ClosedSphericalCurve {
        self.curves.last().expect("trajectory records t = 0")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory records t = 0")
    }
}

pub fn stable_dt(c: &ClosedSphericalCurve, cfl_factor: f64) -> f64 {
    let h = c.min_edge_length();
    cfl_factor * h * h
}

/// One explicit Euler step of length `dt`, followed by uniform resampling to
/// `resample_n` vertices.
pub fn flow_step(c: &ClosedSphericalCurve, dt: f64, resample_n: usize) -> Result<ClosedSphericalCurve> {
    let pass = curvature_pass(c);
    advance(&pass, dt, 0.0, resample_n).map(|(next, _)| next)
}

/// Moves every vertex by `dt·κᵢ + offset·nᵢ` and resamples. Also returns the
/// left area of the moved polygon before resampling.
fn advance(pass: &CurvaturePass, dt: f64, offset: f64, resample_n: usize) -> Result<(ClosedSphericalCurve, f64)> {
    let moved: Vec<SpherePoint> =
        pass.vectors.iter().zip(&pass.normals).map(|(k, nrm)| exp_map(k.base, k.v * dt + *nrm * offset)).collect();
    let n = moved.len();
    let lengths: Vec<f64> = (0..n).map(|i| geodesic_distance(moved[i], moved[(i + 1) % n])).collect();
    if lengths.iter().any(|&l| !(1e-14..=FRAC_PI_2).contains(&l)) {
        return Err(Error::NonSimpleAfterStep);
    }
    let moved = ClosedSphericalCurve::from_valid(moved);
    let area = simple_left_area(&moved).ok_or(Error::NonSimpleAfterStep)?;
    // equal-arclength points on a simple polyline are distinct and closer than its edges
    let next = ClosedSphericalCurve::from_valid(resample_points(moved.vertices(), &lengths, resample_n));
    Ok((next, area))
}

/// Normal offset that moves the left area from `current` back to `target`,
/// capped at a tenth of the shortest edge.
fn area_offset(pass: &CurvaturePass, target: Option<f64>) -> f64 {
    let Some(target) = target else { return 0.0 };
    let current = TAU - pass.total_turning;
    let cap = 0.1 * pass.min_edge;
    ((current - target) / pass.length).clamp(-cap, cap)
}

/// Reasons an individual curve can no longer be stepped.
fn singular(pass: &CurvaturePass, params: &FlowParams) -> bool {
    let left = TAU - pass.total_turning;
    let min_side = left.min(2.0 * TAU - left);
    min_side < params.singular_area || pass.max_norm > params.max_curvature
}

/// Equal-arclength copy of `c` with `n` vertices and the same left area.
/// Without it the first resampling of an unevenly spaced input cuts corners
/// by far more than the per-step correction can restore.
fn conditioned_start(c: &ClosedSphericalCurve, n: usize) -> Result<ClosedSphericalCurve> {
    let target = left_area_unchecked(c);
    let mut start = resample(c, n)?;
    for _ in 0..4 {
        let excess = left_area_unchecked(&start) - target;
        if excess.abs() <= 1e-14 * TAU {
            break;
        }
        start = normal_offset(&start, excess / total_length(&start))?;
    }
    if !is_simple(&start) {
        return Err(Error::NonSimpleCurve);
    }
    Ok(start)
}

struct Lane {
    current: ClosedSphericalCurve,
    /// Left area before the last resampling.
    target_area: Option<f64>,
    traj: Trajectory,
    alive: bool,
}

impl Lane {
    fn record(&mut self, t: f64) {
        if self.traj.times.last() == Some(&t) {
            return;
        }
        self.traj.times.push(t);
        self.traj.diagnostics.push(DiagnosticsRecord::of(&self.current));
        self.traj.curves.push(self.current.clone());
    }

    fn stop(&mut self, t: f64, status: TerminalStatus) {
        self.record(t);
        self.traj.terminal_status = status;
        self.alive = false;
    }
}

/// Evolves all curves on one time grid: each step uses the smallest stable dt
/// among the curves still alive. A curve that turns singular or non-simple is
/// frozen with its status and the others continue, so record times agree on
/// the common prefix.
///
/// Resampling cuts polygon corners and so changes the enclosed area at first
/// order in the mesh size. Each step therefore adds a uniform normal offset
/// that returns the area to its value before the previous resampling.
pub fn evolve_many(curves: &[ClosedSphericalCurve], params: &FlowParams) -> Result<Vec<Trajectory>> {
    params.validate()?;
    let mut lanes = Vec::with_capacity(curves.len());
    for c in curves {
        if !is_simple(c) {
            return Err(Error::NonSimpleCurve);
        }
        let start = conditioned_start(c, params.resample_n)?;
        let mut lane = Lane {
            target_area: Some(left_area_unchecked(&start)),
            current: start,
            traj: Trajectory {
                times: vec![],
                curves: vec![],
                diagnostics: vec![],
                terminal_status: TerminalStatus::ReachedEnd,
            },
            alive: true,
        };
        lane.record(0.0);
        lanes.push(lane);
    }

    let mut t = 0.0f64;
    let mut steps = 0usize;
    let end_eps = 1e-12 * params.t_end.max(1.0);
    loop {
        let mut passes: Vec<Option<CurvaturePass>> = Vec::with_capacity(lanes.len());
        for lane in lanes.iter_mut() {
            if !lane.alive {
                passes.push(None);
                continue;
            }
            let pass = curvature_pass(&lane.current);
            if singular(&pass, params) {
                lane.stop(t, TerminalStatus::Singular(t));
                passes.push(None);
            } else {
                passes.push(Some(pass));
            }
        }
        if lanes.iter().all(|l| !l.alive) || t >= params.t_end - end_eps {
            break;
        }
        let dt_stable =
            passes.iter().flatten().map(|p| params.cfl_factor * p.min_edge * p.min_edge).fold(f64::INFINITY, f64::min);
        let remaining = params.t_end - t;
        let (dt, last) = if dt_stable >= remaining - end_eps { (remaining, true) } else { (dt_stable, false) };
        let t_next = if last { params.t_end } else { t + dt };
        for (lane, pass) in lanes.iter_mut().zip(&passes) {
            let Some(pass) = pass else { continue };
            let offset = area_offset(pass, lane.target_area);
            match advance(pass, dt, offset, params.resample_n) {
                Ok((next, area)) => {
                    lane.current = next;
                    lane.target_area = Some(area);
                }
                Err(_) => lane.stop(t, TerminalStatus::NonSimple(t)),
            }
        }
        t = t_next;
        steps += 1;
        if steps.is_multiple_of(params.record_every) || last {
            for lane in lanes.iter_mut().filter(|l| l.alive) {
                if is_simple(&lane.current) {
                    lane.record(t);
                } else {
                    lane.traj.terminal_status = TerminalStatus::NonSimple(t);
                    lane.alive = false;
                }
            }
        }
    }
    // the final state is always recorded
    for lane in lanes.iter_mut().filter(|l| l.alive) {
        lane.record(t);
    }
    Ok(lanes.into_iter().map(|l| l.traj).collect())
}

pub fn evolve(c: &ClosedSphericalCurve, params: &FlowParams) -> Result<Trajectory> {
    Ok(evolve_many(std::slice::from_ref(c), params)?.pop().expect("one lane"))
}

pub fn evolve_pair(
    a: &ClosedSphericalCurve,
    b: &ClosedSphericalCurve,
    params: &FlowParams,
) -> Result<(Trajectory, Trajectory)> {
    let mut v = evolve_many(&[a.clone(), b.clone()], params)?;
    let tb = v.pop().expect("two lanes");
    let ta = v.pop().expect("two lanes");
    Ok((ta, tb))
}

/// Transversal intersection points of two curves.
pub fn intersection_points(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> Result<Vec<SpherePoint>> {
    let x = find_intersections(a, b);
    if let Some(&(i, j)) = x.degenerate_edges.first() {
        return Err(Error::DegenerateIntersection(i, j));
    }
    Ok(x.transversal)
}

// ---------------------------------------------------------------------------
// Intersection tracking

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackStatus {
    Alive,
    MergedAt(f64),
    LostAt(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionTrack {
    pub times: Vec<f64>,
    pub points: Vec<SpherePoint>,
    pub status: TrackStatus,
}

impl IntersectionTrack {
    pub fn is_alive(&self) -> bool {
        self.status == TrackStatus::Alive
    }

    /// Largest jump between consecutive points, divided by `√Δt`.
    pub fn continuity_constant(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, p)| geodesic_distance(p[0], p[1]) / (t[1] - t[0]).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Follows intersection points of two trajectories through their common record
/// times by nearest-neighbour continuation with rejection radius `10·√Δt`.
///
/// Old points left unmatched end their track: `MergedAt` when another track
/// ended next to it at the same time (a pair annihilating), `LostAt` otherwise.
/// New unmatched points open new tracks.
pub fn track_intersections(ta: &Trajectory, tb: &Trajectory) -> Vec<IntersectionTrack> {
    let steps = ta.times.len().min(tb.times.len());
    let mut tracks: Vec<IntersectionTrack> = Vec::new();
    for k in 0..steps {
        let t = ta.times[k];
        let pts = find_intersections(&ta.curves[k], &tb.curves[k]).all_points();
        if k == 0 {
            for p in pts {
                tracks.push(IntersectionTrack { times: vec![t], points: vec![p], status: TrackStatus::Alive });
            }
            continue;
        }
        let rho = 10.0 * (t - ta.times[k - 1]).sqrt();
        let alive: Vec<usize> = (0..tracks.len()).filter(|&i| tracks[i].is_alive()).collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for &ti in &alive {
            let last = *tracks[ti].points.last().expect("non-empty track");
            for (pi, p) in pts.iter().enumerate() {
                let d = geodesic_distance(last, *p);
                if d < rho {
                    pairs.push((d, ti, pi));
                }
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut track_used = vec![false; tracks.len()];
        let mut point_used = vec![false; pts.len()];
        for (_, ti, pi) in pairs {
            if track_used[ti] || point_used[pi] {
                continue;
            }
            track_used[ti] = true;
            point_used[pi] = true;
            tracks[ti].times.push(t);
            tracks[ti].points.push(pts[pi]);
        }
        let ended: Vec<usize> = alive.iter().copied().filter(|&ti| !track_used[ti]).collect();
        for &ti in &ended {
            let last = *tracks[ti].points.last().expect("non-empty track");
            let partner = ended
                .iter()
                .any(|&o| o != ti && geodesic_distance(last, *tracks[o].points.last().expect("non-empty")) < 2.0 * rho);
            tracks[ti].status = if partner { TrackStatus::MergedAt(t) } else { TrackStatus::LostAt(t) };
        }
        for (pi, p) in pts.iter().enumerate() {
            if !point_used[pi] {
                tracks.push(IntersectionTrack { times: vec![t], points: vec![*p], status: TrackStatus::Alive });
            }
        }
    }
    tracks
}

/// Number of alive tracks at each common record time.
pub fn alive_track_counts(tracks: &[IntersectionTrack], times: &[f64]) -> Vec<usize> {
    times
        .iter()
        .map(|&t| {
            tracks
                .iter()
                .filter(|tr| {
                    let started = tr.times.first().is_some_and(|&s| s <= t);
                    let ended = match tr.status {
                        TrackStatus::Alive => false,
                        TrackStatus::MergedAt(e) | TrackStatus::LostAt(e) => e <= t,
                    };
                    started && !ended
                })
                .count()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{gen_latitude_circle, gen_perturbed_bisector, PerturbationSpec};
    use crate::metrics::hausdorff_distance;
    use crate::sphgeo::{Rotation, Vec3};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn start_is_equally_spaced_with_input_area() {
        let c = gen_perturbed_bisector(&PerturbationSpec::random(64, 0.3, 2, 5)).unwrap();
        let s = conditioned_start(&c, 64).unwrap();
        let lengths = s.edge_lengths();
        let mean = total_length(&s) / 64.0;
        let spread = |v: &[f64], m: f64| v.iter().map(|l| (l - m).abs() / m).fold(0.0, f64::max);
        let before = spread(&c.edge_lengths(), total_length(&c) / 64.0);
        assert!(before > 0.2);
        assert!(spread(&lengths, mean) < 0.05);
        assert_abs_diff_eq!(left_area_unchecked(&s), left_area_unchecked(&c), epsilon = 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(FlowParams::default().validate().is_ok());
        for bad in [
            FlowParams { cfl_factor: 0.0, ..Default::default() },
            FlowParams { cfl_factor: 0.6, ..Default::default() },
            FlowParams { resample_n: 16, ..Default::default() },
            FlowParams { singular_area: 0.0, ..Default::default() },
            FlowParams { record_every: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn stable_dt_examples() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        let h = TAU / 64.0;
        assert_abs_diff_eq!(stable_dt(&eq, 0.25), 0.25 * h * h, epsilon = 1e-15);
        let eq2 = gen_latitude_circle(FRAC_PI_2, 128);
        assert_abs_diff_eq!(stable_dt(&eq, 0.25) / stable_dt(&eq2, 0.25), 4.0, epsilon = 1e-9);
    }

    #[test]
    fn equator_is_stationary() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        let s = flow_step(&eq, 0.05, 64).unwrap();
        assert!(hausdorff_distance(&eq, &s) <= 1e-6);
        let z = flow_step(&eq, 0.0, 64).unwrap();
        for (a, b) in z.vertices().iter().zip(eq.vertices()) {
            assert!(geodesic_distance(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn one_step_of_shrinking_circle() {
        // dθ/dt = −cot θ  ⇒  cos θ(t) = cos θ₀·eᵗ
        let theta0 = 1.0f64;
        let n = 512;
        let c = gen_latitude_circle(theta0, n);
        let dt = stable_dt(&c, 0.25);
        let s = flow_step(&c, dt, n).unwrap();
        let z = s.vertices().iter().map(|p| p.vec().z).sum::<f64>() / n as f64;
        let expected = theta0.cos() * dt.exp();
        // O(dt²) plus the O(h²) polygon error times dt
        assert_abs_diff_eq!(z, expected, epsilon = 1e-8);
    }

    #[test]
    fn evolve_equator() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        let params = FlowParams { resample_n: 64, t_end: 1.0, ..Default::default() };
        let tr = evolve(&eq, &params).unwrap();
        assert_eq!(tr.terminal_status, TerminalStatus::ReachedEnd);
        assert_eq!(tr.last_time(), 1.0);
        assert!(hausdorff_distance(&eq, tr.last_curve()) <= 1e-6);
    }

    #[test]
    fn shrinking_circle_hits_singularity_near_ln2() {
        let c = gen_latitude_circle(PI / 3.0, 128);
        let params = FlowParams { resample_n: 128, t_end: 2.0, record_every: 1000, ..Default::default() };
        let tr = evolve(&c, &params).unwrap();
        match tr.terminal_status {
            TerminalStatus::Singular(t) => assert_abs_diff_eq!(t, 2f64.ln(), epsilon = 2e-2),
            other => panic!("{other:?}"),
        }
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
        assert!(tr.diagnostics.windows(2).all(|w| w[1].length <= w[0].length + 1e-9));
    }

    #[test]
    fn pair_shares_grid() {
        let a = gen_latitude_circle(PI / 3.0, 64);
        let b = gen_latitude_circle(2.0 * PI / 3.0, 96);
        let params = FlowParams { resample_n: 64, t_end: 0.3, record_every: 20, ..Default::default() };
        let (ta, tb) = evolve_pair(&a, &b, &params).unwrap();
        assert_eq!(ta.times, tb.times);
        for (ca, cb) in ta.curves.iter().zip(&tb.curves) {
            assert!(crate::analysis::curve_separation(ca, cb) > 0.0);
        }
    }

    #[test]
    fn fixed_great_circles_keep_two_tracks() {
        let eq = gen_latitude_circle(FRAC_PI_2, 64);
        let rot = Rotation::about_axis(SpherePoint::from_vec(Vec3::new(1.0, 0.2, 0.0)).unwrap(), FRAC_PI_2);
        let other = eq.map_vertices(|p| rot.apply(p)).unwrap();
        let params = FlowParams { resample_n: 64, t_end: 0.2, record_every: 10, ..Default::default() };
        let (ta, tb) = evolve_pair(&eq, &other, &params).unwrap();
        for (ca, cb) in ta.curves.iter().zip(&tb.curves) {
            assert_eq!(intersection_points(ca, cb).unwrap().len(), 2);
        }
        let tracks = track_intersections(&ta, &tb);
        assert_eq!(tracks.len(), 2);
        for tr in &tracks {
            assert!(tr.is_alive());
            assert_eq!(tr.points.len(), ta.times.len());
            assert!(tr.points.iter().all(|p| geodesic_distance(*p, tr.points[0]) < 1e-6));
        }
    }

    #[test]
    fn disjoint_and_flower_intersections() {
        let a = gen_latitude_circle(1.0, 64);
        let b = gen_latitude_circle(2.0, 64);
        assert!(intersection_points(&a, &b).unwrap().is_empty());
        let f = gen_perturbed_bisector(&PerturbationSpec::flower(126, 0.2, &[3], 0)).unwrap();
        let eq = gen_latitude_circle(FRAC_PI_2, 102);
        assert_eq!(intersection_points(&f, &eq).unwrap().len(), 6);
    }

    #[test]
    fn merging_tracks_do_not_increase() {
        // a 2-mode flower meets the equator in 4 points; the tilted copy of the
        // equator keeps only 2 once the lobes flatten out
        let f = gen_perturbed_bisector(&PerturbationSpec::flower(96, 0.3, &[2], 0)).unwrap();
        let tilt = Rotation::about_axis(SpherePoint::E1, 0.12);
        let g = gen_latitude_circle(FRAC_PI_2, 96).map_vertices(|p| tilt.apply(p)).unwrap();
        let params = FlowParams { resample_n: 96, t_end: 1.5, record_every: 40, ..Default::default() };
        let (ta, tb) = evolve_pair(&f, &g, &params).unwrap();
        let counts: Vec<usize> =
            ta.curves.iter().zip(&tb.curves).map(|(a, b)| crate::analysis::intersection_count(a, b).count).collect();
        assert_eq!(counts[0], 4);
        assert_eq!(*counts.last().unwrap(), 2);
        assert!(counts.windows(2).all(|w| w[1] <= w[0]));
        let tracks = track_intersections(&ta, &tb);
        let alive = alive_track_counts(&tracks, &ta.times);
        assert_eq!(alive, counts);
        assert!(tracks.iter().all(|t| t.times[0] == 0.0));
    }
}
