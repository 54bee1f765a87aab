//! Curve-shortening flow of Jordan curves on the unit sphere.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphgeo`]: points, tangent vectors, great circles, exp/log maps.
//! * [`curve`]: closed geodesic polygons, simplicity, Gauss–Bonnet areas,
//!   discrete geodesic curvature, resampling, bisector offsets.
//! * [`metrics`]: discrete Fréchet and Hausdorff distances.
//! * [`flow`]: the explicit curvature-flow integrator and intersection tracking.
//! * [`analysis`]: great-circle fits, r-multiplicity, intersection counts.
//! * [`harness`]: generators and the reproducible experiments.
//! * [`io`]: curve JSON, trajectory JSONL and report formats.

pub mod analysis;
pub mod curve;
pub mod error;
pub mod flow;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod sphgeo;

pub use analysis::{
    fit_great_circle, fit_small_circle, gage_residual, gauss_bonnet_defect, intersection_count, r_multiplicity,
    IntersectionCount, MultiplicityReport, SmallCircle,
};
pub use curve::{AreaPair, ClosedSphericalCurve};
pub use error::{Error, Result};
pub use flow::{
    evolve, evolve_pair, flow_step, stable_dt, track_intersections, DiagnosticsRecord, FlowParams, IntersectionTrack,
    TerminalStatus, Trajectory,
};
pub use harness::{CurveSpec, ExperimentReport, PerturbationSpec, Tolerances};
pub use metrics::{frechet_distance, hausdorff_distance, CouplingResult};
pub use sphgeo::{GreatCircle, SpherePoint, TangentVector, Vec3};
