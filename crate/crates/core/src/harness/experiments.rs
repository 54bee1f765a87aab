//! The flow experiments. Each returns an [`ExperimentReport`] whose verdict
//! is a pure function of its rows and tolerances (see [`verdict`]).

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde_json::json;

use super::report::{ExperimentReport, Row};
use super::{gen_bisector_from, CurveSpec, PerturbationSpec};
use crate::analysis::{curve_separation, find_intersections, fit_great_circle, gage_residual, is_left_of};
use crate::curve::{arc_intersection, is_simple, left_area_unchecked, normal_offset, ArcHit, ClosedSphericalCurve};
use crate::error::{Error, Result};
use crate::flow::{
    alive_track_counts, evolve, evolve_many, evolve_pair, flow_step, stable_dt, FlowParams, TerminalStatus, Trajectory,
};
use crate::metrics::{frechet_distance, hausdorff_distance};
use crate::sphgeo::{geodesic_distance, slerp, SpherePoint, Vec3};

/// Pass thresholds, fixed before any run.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Largest admissible evolved Fréchet distance for the smallest amplitude.
    pub continuity: f64,
    /// Final great-circle residual.
    pub gage_final: f64,
    /// Slack on every "non-increasing" check.
    pub monotone_slack: f64,
    /// `|area − 2π|` for the crossing chord.
    pub chord_area: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { continuity: 0.05, gage_final: 1e-2, monotone_slack: 1e-9, chord_area: 1e-6 }
    }
}

impl Tolerances {
    fn map(&self, keys: &[&str]) -> BTreeMap<String, f64> {
        let all = [
            ("continuity", self.continuity),
            ("gage_final", self.gage_final),
            ("monotone_slack", self.monotone_slack),
            ("chord_area", self.chord_area),
        ];
        all.iter().filter(|(k, _)| keys.contains(k)).map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

fn status_code(s: &TerminalStatus) -> f64 {
    match s {
        TerminalStatus::ReachedEnd => 0.0,
        TerminalStatus::Singular(_) => 1.0,
        TerminalStatus::NonSimple(_) => 2.0,
    }
}

fn column(rows: &[Row], key: &str) -> Vec<f64> {
    rows.iter().map(|r| r.get(key).unwrap_or(f64::NAN)).collect()
}

fn non_increasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Pass/fail from rows and tolerances only.
pub(crate) fn verdict(name: &str, rows: &[Row], tol: &BTreeMap<String, f64>) -> bool {
    let t = |k: &str| tol.get(k).copied().unwrap_or(f64::NAN);
    if rows.is_empty() {
        return false;
    }
    match name {
        "continuity" => {
            let ok = column(rows, "ok");
            let d = column(rows, "d_evolved");
            ok.iter().all(|&v| v == 1.0)
                && d.iter().all(|v| v.is_finite())
                && non_increasing(&d, t("monotone_slack"))
                && *d.last().expect("non-empty") <= t("continuity")
        }
        "gage" => {
            let r = column(rows, "residual");
            let status = column(rows, "status");
            if r.iter().any(|v| !v.is_finite()) || status.iter().any(|&s| s != 0.0) {
                return false;
            }
            let peak = r.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).expect("non-empty");
            *r.last().expect("non-empty") <= t("gage_final") && non_increasing(&r[peak..], t("monotone_slack"))
        }
        "angenent" => non_increasing(&column(rows, "count"), 0.0),
        "avoidance" => column(rows, "separation").iter().all(|&d| d > 0.0),
        "sandwich" => column(rows, "contained").iter().all(|&c| c == 1.0),
        "chord" => rows.iter().all(|r| {
            r.get("zeta_simple") == Some(1.0)
                && r.get("crossings") == Some(2.0)
                && r.get("area_left").is_some_and(|a| (a - TAU).abs() <= t("chord_area"))
        }),
        _ => false,
    }
}

fn finish(
    name: &str,
    inputs: serde_json::Value,
    tolerances: BTreeMap<String, f64>,
    rows: Vec<Row>,
) -> ExperimentReport {
    let pass = verdict(name, &rows, &tolerances);
    ExperimentReport { name: name.to_string(), inputs, tolerances, rows, pass }
}

fn params_value(p: &FlowParams) -> serde_json::Value {
    json!({
        "cfl": p.cfl_factor,
        "n": p.resample_n,
        "t_end": p.t_end,
        "record_every": p.record_every,
        "singular_area": p.singular_area,
        "max_curvature": p.max_curvature,
    })
}

// ---------------------------------------------------------------------------

/// Flows a base bisector and bisectors perturbed from it by decreasing
/// amplitudes, and compares the evolved curves in Fréchet distance.
///
/// Perturbed case `j` adds `amplitudes[j]`-scaled random modes (seeded from
/// `base.seed + 1`) to the base displacement before the bisector offset.
pub fn exp_continuity(
    base: &PerturbationSpec,
    amplitudes: &[f64],
    params: &FlowParams,
    tol: &Tolerances,
) -> Result<ExperimentReport> {
    params.validate()?;
    base.validate()?;
    if amplitudes.is_empty() || amplitudes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("amplitudes must be non-empty and strictly decreasing".into()));
    }
    let n = base.n;
    let base_f = base.displacement();
    let gamma = gen_bisector_from(n, &base_f)?;
    let base_traj = evolve(&gamma, params)?;

    let rows: Vec<Row> = amplitudes
        .par_iter()
        .map(|&a| {
            let extra = PerturbationSpec::random(n, a, 2, base.seed.wrapping_add(1)).displacement();
            let row = Row::new().with("amplitude", a);
            let gamma_j = match gen_bisector_from(n, |s| base_f(s) + extra(s)) {
                Ok(c) => c,
                Err(_) => return row.with("d_initial", f64::NAN).with("d_evolved", f64::NAN).with("ok", 0.0),
            };
            let d0 = frechet_distance(&gamma_j, &gamma).distance;
            let ok = |tr: &Trajectory| tr.terminal_status == TerminalStatus::ReachedEnd;
            match evolve(&gamma_j, params) {
                Ok(tr) if ok(&tr) && ok(&base_traj) => {
                    let d1 = frechet_distance(tr.last_curve(), base_traj.last_curve()).distance;
                    row.with("d_initial", d0).with("d_evolved", d1).with("ok", 1.0)
                }
                _ => row.with("d_initial", d0).with("d_evolved", f64::NAN).with("ok", 0.0),
            }
        })
        .collect();

    let inputs = json!({ "base": base.to_value(), "amplitudes": amplitudes, "params": params_value(params) });
    Ok(finish("continuity", inputs, tol.map(&["continuity", "monotone_slack"]), rows))
}

/// Great-circle residual along the flow of one curve.
pub fn exp_gage(spec: &CurveSpec, params: &FlowParams, tol: &Tolerances) -> Result<ExperimentReport> {
    let c = spec.generate()?;
    let tr = evolve(&c, params)?;
    let last = tr.times.len() - 1;
    let rows = tr
        .times
        .iter()
        .zip(&tr.diagnostics)
        .enumerate()
        .map(|(k, (t, d))| {
            let status = if k == last { status_code(&tr.terminal_status) } else { 0.0 };
            Row::new()
                .with("t", *t)
                .with("residual", d.gage_residual.unwrap_or(f64::NAN))
                .with("length", d.length)
                .with("area_left", d.area_left)
                .with("status", status)
        })
        .collect();
    let inputs = json!({ "curve": spec.to_value(), "params": params_value(params) });
    Ok(finish("gage", inputs, tol.map(&["gage_final", "monotone_slack"]), rows))
}

fn distinct(a: &ClosedSphericalCurve, b: &ClosedSphericalCurve) -> bool {
    a != b && hausdorff_distance(a, b) > 1e-9
}

/// Intersection counts of two evolving curves at their shared record times.
///
/// A record with a degenerate contact is re-evaluated one flow step later.
pub fn exp_angenent(a: &CurveSpec, b: &CurveSpec, params: &FlowParams) -> Result<ExperimentReport> {
    let (ca, cb) = (a.generate()?, b.generate()?);
    if !distinct(&ca, &cb) {
        return Err(Error::InvalidParams("curves must be distinct".into()));
    }
    let (ta, tb) = evolve_pair(&ca, &cb, params)?;
    let steps = ta.times.len().min(tb.times.len());
    let tracks = crate::flow::track_intersections(&ta, &tb);
    let alive = alive_track_counts(&tracks, &ta.times[..steps]);
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let (mut x, mut y) = (ta.curves[k].clone(), tb.curves[k].clone());
        let mut t = ta.times[k];
        let mut resampled = 0.0;
        let mut hits = find_intersections(&x, &y);
        for _ in 0..4 {
            if !hits.is_degenerate() {
                break;
            }
            let dt = stable_dt(&x, params.cfl_factor).min(stable_dt(&y, params.cfl_factor));
            match (flow_step(&x, dt, params.resample_n), flow_step(&y, dt, params.resample_n)) {
                (Ok(nx), Ok(ny)) => {
                    x = nx;
                    y = ny;
                    t += dt;
                    resampled += 1.0;
                    hits = find_intersections(&x, &y);
                }
                _ => break,
            }
        }
        rows.push(
            Row::new()
                .with("t", t)
                .with("count", hits.count() as f64)
                .with("degenerate", if hits.is_degenerate() { 1.0 } else { 0.0 })
                .with("resampled_steps", resampled)
                .with("tracks", alive[k] as f64),
        );
    }
    let inputs = json!({ "a": a.to_value(), "b": b.to_value(), "params": params_value(params) });
    Ok(finish("angenent", inputs, BTreeMap::new(), rows))
}

/// Mutual distance of two initially disjoint curves along their flows, up to
/// the first time either one stops.
pub fn exp_avoidance(a: &CurveSpec, b: &CurveSpec, params: &FlowParams) -> Result<ExperimentReport> {
    let (ca, cb) = (a.generate()?, b.generate()?);
    if curve_separation(&ca, &cb) <= 0.0 {
        return Err(Error::InvalidParams("curves must be disjoint at t = 0".into()));
    }
    let (ta, tb) = evolve_pair(&ca, &cb, params)?;
    let steps = ta.times.len().min(tb.times.len());
    let rows = (0..steps)
        .map(|k| Row::new().with("t", ta.times[k]).with("separation", curve_separation(&ta.curves[k], &tb.curves[k])))
        .collect();
    let inputs = json!({ "a": a.to_value(), "b": b.to_value(), "params": params_value(params) });
    Ok(finish("avoidance", inputs, BTreeMap::new(), rows))
}

/// Flows a curve together with its normal offsets at ±δ and checks that the
/// curve stays inside the annulus between them.
pub fn exp_sandwich(spec: &CurveSpec, delta: f64, params: &FlowParams) -> Result<ExperimentReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("offset δ = {delta} must be positive")));
    }
    let base = spec.generate()?;
    let left = normal_offset(&base, delta).map_err(|e| Error::GenerationFailed(e.to_string()))?;
    let right = normal_offset(&base, -delta).map_err(|e| Error::GenerationFailed(e.to_string()))?;
    for off in [&left, &right] {
        if !is_simple(off) || find_intersections(off, &base).count() > 0 {
            return Err(Error::GenerationFailed(format!("offset δ = {delta} self-intersects or meets the curve")));
        }
    }
    let trajs = evolve_many(&[base, left, right], params)?;
    let steps = trajs.iter().map(|t| t.times.len()).min().expect("three lanes");
    let rows = (0..steps)
        .map(|k| {
            let (b, l, r) = (&trajs[0].curves[k], &trajs[1].curves[k], &trajs[2].curves[k]);
            let probe = b.vertex(0);
            let contained = find_intersections(b, l).count() == 0
                && find_intersections(b, r).count() == 0
                && !is_left_of(l, probe)
                && is_left_of(r, probe);
            Row::new()
                .with("t", trajs[0].times[k])
                .with("contained", if contained { 1.0 } else { 0.0 })
                .with("sep_left", curve_separation(b, l))
                .with("sep_right", curve_separation(b, r))
        })
        .collect();
    let inputs = json!({ "curve": spec.to_value(), "delta": delta, "params": params_value(params) });
    Ok(finish("sandwich", inputs, BTreeMap::new(), rows))
}

// ---------------------------------------------------------------------------
// Area-bisecting crossing curve

/// Details of one crossing-chord construction.
#[derive(Debug, Clone)]
pub struct ChordOutcome {
    pub zeta: ClosedSphericalCurve,
    pub pole: SpherePoint,
    /// Arclength from `x` (walking against the curve's orientation) to the partner point.
    pub partner_arclength: f64,
    pub partner: SpherePoint,
    pub area_left: f64,
    /// `a(x, ·)` sampled at 32 evenly spaced arclengths.
    pub area_samples: Vec<f64>,
    pub crossings: usize,
}

/// Longitude of `p` about `pole` in a fixed frame.
fn longitude(pole: Vec3, u: Vec3, w: Vec3, p: SpherePoint) -> f64 {
    let v = p.vec() - pole * p.vec().dot(pole);
    v.dot(w).atan2(v.dot(u))
}

fn check_star_shaped(c: &ClosedSphericalCurve, pole: SpherePoint) -> Result<()> {
    let n = pole.vec();
    let u = n.cross(Vec3::new(0.3, 0.5, 0.7)).normalized().or_else(|| n.cross(Vec3::new(1.0, 0.0, 0.0)).normalized());
    let u = u.expect("a non-parallel helper exists");
    let w = n.cross(u);
    if crate::curve::distance_point_to_curve(pole, c) < 1e-6
        || crate::curve::distance_point_to_curve(pole.antipode(), c) < 1e-6
    {
        return Err(Error::NotStarShaped);
    }
    let lon: Vec<f64> = c.vertices().iter().map(|&p| longitude(n, u, w, p)).collect();
    let mut total = 0.0;
    for i in 0..lon.len() {
        let mut d = lon[(i + 1) % lon.len()] - lon[i];
        while d <= -std::f64::consts::PI {
            d += TAU;
        }
        while d > std::f64::consts::PI {
            d -= TAU;
        }
        if d <= 0.0 {
            return Err(Error::NotStarShaped);
        }
        total += d;
    }
    if (total - TAU).abs() > 1e-9 {
        return Err(Error::NotStarShaped);
    }
    Ok(())
}

/// Geodesic from `p` to `q` cut into pieces of at most 0.1 rad; excludes `q`.
fn leg(p: SpherePoint, q: SpherePoint) -> Vec<SpherePoint> {
    let k = (geodesic_distance(p, q) / 0.1).ceil().max(1.0) as usize;
    (0..k).map(|j| slerp(p, q, j as f64 / k as f64)).collect()
}

/// The closed chord curve `x → pole → y → −pole → x`.
fn chord_curve(x: SpherePoint, y: SpherePoint, pole: SpherePoint) -> Result<ClosedSphericalCurve> {
    let south = pole.antipode();
    let mut pts = leg(x, pole);
    pts.extend(leg(pole, y));
    pts.extend(leg(y, south));
    pts.extend(leg(south, x));
    ClosedSphericalCurve::new(pts)
}

/// Whether the open geodesic `from → to` (from a curve point to a pole) meets `c`
/// anywhere but at `from`.
fn chord_touches(c: &ClosedSphericalCurve, from: SpherePoint, to: SpherePoint) -> bool {
    let d = geodesic_distance(from, to);
    let start = slerp(from, to, 1e-7 / d);
    let pts = leg(start, to);
    let mut pts = pts;
    pts.push(to);
    pts.windows(2).any(|s| {
        (0..c.len()).any(|i| {
            let (e0, e1) = c.edge(i);
            arc_intersection(s[0], s[1], e0, e1) != ArcHit::None
        })
    })
}

/// Point at arclength `u` from vertex `start`, walking against the orientation.
fn point_backward(c: &ClosedSphericalCurve, start: usize, u: f64) -> SpherePoint {
    let n = c.len();
    let mut remaining = u;
    let mut i = start;
    for _ in 0..n {
        let prev = (i + n - 1) % n;
        let (a, b) = (c.vertex(i), c.vertex(prev));
        let len = geodesic_distance(a, b);
        if remaining <= len {
            return slerp(a, b, remaining / len);
        }
        remaining -= len;
        i = prev;
    }
    c.vertex(start)
}

/// Builds the area-bisecting crossing curve through vertex `x_index` of a
/// curve that is star-shaped about its fitted pole.
///
/// Both chords are geodesics routed through the poles of the fitted great
/// circle: `x → N → y` crosses the left region and `y → −N → x` the right one.
/// The partner `y` is found by bisection on arclength so that the region left
/// of the chord curve has area 2π.
pub fn crossing_chord(c: &ClosedSphericalCurve, x_index: usize) -> Result<ChordOutcome> {
    if x_index >= c.len() {
        return Err(Error::InvalidParams(format!("vertex index {x_index} out of range")));
    }
    let pole = fit_great_circle(c)?.normal;
    check_star_shaped(c, pole)?;
    let x = c.vertex(x_index);
    let total: f64 = crate::curve::total_length(c);
    let area_at = |u: f64| -> Result<(f64, ClosedSphericalCurve, SpherePoint)> {
        let y = point_backward(c, x_index, u);
        let z = chord_curve(x, y, pole)?;
        Ok((left_area_unchecked(&z), z, y))
    };

    let area_samples =
        (0..32).map(|k| area_at(total * (k as f64 + 0.5) / 32.0).map(|r| r.0)).collect::<Result<Vec<_>>>()?;

    let (mut lo, mut hi) = (1e-9 * total, total * (1.0 - 1e-9));
    let mut best = area_at(0.5 * (lo + hi))?;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..100 {
        mid = 0.5 * (lo + hi);
        best = area_at(mid)?;
        if (best.0 - TAU).abs() <= 1e-12 {
            break;
        }
        if best.0 < TAU {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (area_left, zeta, y) = best;
    let south = pole.antipode();
    for (from, to) in [(x, pole), (y, pole), (y, south), (x, south)] {
        if chord_touches(c, from, to) {
            return Err(Error::ChordTouchesCurve);
        }
    }
    let crossings = if geodesic_distance(x, y) > 1e-9 { 2 } else { 1 };
    Ok(ChordOutcome { zeta, pole, partner_arclength: mid, partner: y, area_left, area_samples, crossings })
}

pub fn exp_crossing_chord(spec: &CurveSpec, x_index: usize, tol: &Tolerances) -> Result<ExperimentReport> {
    let c = spec.generate()?;
    let out = crossing_chord(&c, x_index)?;
    let monotone = out.area_samples.windows(2).all(|w| w[1] > w[0]);
    let row = Row::new()
        .with("x_index", x_index as f64)
        .with("partner_arclength", out.partner_arclength)
        .with("area_left", out.area_left)
        .with("zeta_simple", if is_simple(&out.zeta) { 1.0 } else { 0.0 })
        .with("crossings", out.crossings as f64)
        .with("bisector", if (out.area_left - TAU).abs() <= tol.chord_area { 1.0 } else { 0.0 })
        .with("monotone", if monotone { 1.0 } else { 0.0 });
    let inputs = json!({ "curve": spec.to_value(), "x_index": x_index });
    Ok(finish("chord", inputs, tol.map(&["chord_area"]), vec![row]))
}

/// Gage residual of every curve of a trajectory, recomputed from the stored curves.
pub fn recompute_residuals(tr: &Trajectory) -> Vec<Option<f64>> {
    tr.curves.iter().map(|c| gage_residual(c).ok()).collect()
}
