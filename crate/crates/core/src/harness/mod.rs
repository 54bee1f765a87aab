//! Curve generators, reproducible experiments and their reports.

mod experiments;
mod report;

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::curve::{is_bisector, is_simple, make_bisector, ClosedSphericalCurve, MIN_VERTICES};
use crate::error::{Error, Result};
use crate::sphgeo::SpherePoint;

pub use experiments::{
    crossing_chord, exp_angenent, exp_avoidance, exp_continuity, exp_crossing_chord, exp_gage, exp_sandwich,
    recompute_residuals, ChordOutcome, Tolerances,
};
pub use report::{ExperimentReport, Row};

/// `n` equally spaced vertices at colatitude `theta`, ordered by increasing
/// longitude so that the north cap is on the left.
///
/// Panics unless `0 < theta < π` and `n >= 8`.
pub fn gen_latitude_circle(theta: f64, n: usize) -> ClosedSphericalCurve {
    assert!(theta > 0.0 && theta < std::f64::consts::PI, "colatitude {theta} outside (0, π)");
    assert!(n >= MIN_VERTICES, "need at least {MIN_VERTICES} vertices");
    let pts = (0..n).map(|k| SpherePoint::from_spherical(theta, TAU * k as f64 / n as f64)).collect();
    ClosedSphericalCurve::new(pts).expect("latitude circle is a valid curve")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Modes {
    /// `(m, phase)` pairs.
    Fixed(Vec<(u32, f64)>),
    /// `k` modes with `m` in `2..=5` and uniform phases, drawn from the seed.
    Random(usize),
}

/// Meridional perturbation of a latitude circle:
/// `f(s) = amplitude · Σ cos(m·s + phase) / #modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub seed: u64,
    pub amplitude: f64,
    pub modes: Modes,
    pub n: usize,
}

impl PerturbationSpec {
    /// Fixed modes with zero phase.
    pub fn flower(n: usize, amplitude: f64, modes: &[u32], seed: u64) -> Self {
        PerturbationSpec { seed, amplitude, modes: Modes::Fixed(modes.iter().map(|&m| (m, 0.0)).collect()), n }
    }

    pub fn random(n: usize, amplitude: f64, k: usize, seed: u64) -> Self {
        PerturbationSpec { seed, amplitude, modes: Modes::Random(k), n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.amplitude) {
            return Err(Error::InvalidParams(format!("amplitude {} outside [0, 0.5)", self.amplitude)));
        }
        if self.n < MIN_VERTICES {
            return Err(Error::InvalidParams(format!("n = {} < {MIN_VERTICES}", self.n)));
        }
        let modes = self.resolved_modes();
        if modes.is_empty() || modes.iter().any(|&(m, _)| m < 2) {
            return Err(Error::InvalidParams("modes must be non-empty with m >= 2".into()));
        }
        Ok(())
    }

    pub fn resolved_modes(&self) -> Vec<(u32, f64)> {
        match &self.modes {
            Modes::Fixed(v) => v.clone(),
            Modes::Random(k) => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                (0..*k).map(|_| (rng.gen_range(2..=5u32), rng.gen_range(0.0..TAU))).collect()
            }
        }
    }

    pub fn displacement(&self) -> impl Fn(f64) -> f64 {
        let modes = self.resolved_modes();
        let amp = self.amplitude;
        move |s| {
            let count = modes.len().max(1) as f64;
            amp * modes.iter().map(|&(m, ph)| (m as f64 * s + ph).cos()).sum::<f64>() / count
        }
    }

    pub fn to_value(&self) -> Value {
        let modes: Vec<Value> = self.resolved_modes().iter().map(|&(m, ph)| json!([m, ph])).collect();
        json!({ "seed": self.seed, "amplitude": self.amplitude, "modes": modes, "n": self.n })
    }
}

/// Vertices `k = 0..n` at longitude `2πk/n` and colatitude `theta0 − f(longitude)`.
pub fn gen_displaced_latitude(theta0: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<ClosedSphericalCurve> {
    let pts = (0..n)
        .map(|k| {
            let s = TAU * k as f64 / n as f64;
            SpherePoint::from_spherical(theta0 - f(s), s)
        })
        .collect();
    let c = ClosedSphericalCurve::new(pts).map_err(|e| Error::GenerationFailed(e.to_string()))?;
    if !is_simple(&c) {
        return Err(Error::GenerationFailed("perturbed curve is not simple".into()));
    }
    Ok(c)
}

/// Rounds of arclength resampling and re-offsetting in [`gen_bisector_from`].
/// Equator displaced by `f`, then offset to a bisector.
pub fn gen_bisector_from(n: usize, f: impl Fn(f64) -> f64) -> Result<ClosedSphericalCurve> {
    let c = gen_displaced_latitude(FRAC_PI_2, n, f)?;
    let b = make_bisector(&c).map_err(|e| Error::GenerationFailed(e.to_string()))?;
    if !is_simple(&b) || !is_bisector(&b, 1e-8).unwrap_or(false) {
        return Err(Error::GenerationFailed("bisector construction lost simplicity".into()));
    }
    Ok(b)
}

pub fn gen_perturbed_bisector(spec: &PerturbationSpec) -> Result<ClosedSphericalCurve> {
    spec.validate()?;
    gen_bisector_from(spec.n, spec.displacement())
}

/// Latitude circle at `theta0` with the meridional perturbation of `spec`.
pub fn gen_perturbed_latitude(theta0: f64, spec: &PerturbationSpec) -> Result<ClosedSphericalCurve> {
    spec.validate()?;
    gen_displaced_latitude(theta0, spec.n, spec.displacement())
}

/// Any of the generator families, as named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Latitude { theta: f64, n: usize },
    Bisector(PerturbationSpec),
    PerturbedLatitude { theta: f64, spec: PerturbationSpec },
}

impl CurveSpec {
    pub fn generate(&self) -> Result<ClosedSphericalCurve> {
        match self {
            CurveSpec::Latitude { theta, n } => {
                if !(*theta > 0.0 && *theta < std::f64::consts::PI) || *n < MIN_VERTICES {
                    return Err(Error::InvalidParams(format!("latitude θ = {theta}, n = {n}")));
                }
                Ok(gen_latitude_circle(*theta, *n))
            }
            CurveSpec::Bisector(spec) => gen_perturbed_bisector(spec),
            CurveSpec::PerturbedLatitude { theta, spec } => gen_perturbed_latitude(*theta, spec),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            CurveSpec::Latitude { theta, n } => json!({ "latitude": theta, "n": n }),
            CurveSpec::Bisector(spec) => json!({ "bisector": spec.to_value() }),
            CurveSpec::PerturbedLatitude { theta, spec } => {
                json!({ "latitude": theta, "perturbation": spec.to_value() })
            }
        }
    }
}
