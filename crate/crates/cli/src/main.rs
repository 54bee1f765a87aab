use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use csflab::curve::{enclosed_areas, is_simple, total_length};
use csflab::harness::{exp_angenent, exp_avoidance, exp_continuity, exp_crossing_chord, exp_gage, exp_sandwich};
use csflab::io::{read_curve_json, read_trajectory_jsonl, to_json_string, write_curve_json, write_trajectory_jsonl};
use csflab::{
    evolve, fit_great_circle, fit_small_circle, frechet_distance, gage_residual, hausdorff_distance,
    intersection_count, r_multiplicity, ClosedSphericalCurve, CurveSpec, Error, ExperimentReport, FlowParams,
    GreatCircle, PerturbationSpec, SpherePoint, Tolerances,
};

#[derive(Parser)]
#[command(name = "csflab", version, about = "Curve-shortening flow on the unit sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated curve as JSON.
    Gen {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Flow a curve and write its trajectory as JSON lines.
    Evolve {
        /// Curve JSON; `-` or absent reads standard input.
        input: Option<PathBuf>,
        /// Resampling size; defaults to the input's vertex count.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the distance between two curves in radians.
    Distance {
        #[arg(long, value_enum, default_value_t = Metric::Frechet)]
        metric: Metric,
        a: PathBuf,
        b: PathBuf,
    },
    /// Report fits, r-multiplicity and intersections for a curve or the
    /// last curve of a trajectory.
    Analyze {
        input: Option<PathBuf>,
        /// Second curve for the intersection count.
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        /// Normal of the reference great circle as `x,y,z`; the fitted one by default.
        #[arg(long, value_delimiter = ',', num_args = 3, allow_hyphen_values = true)]
        pole: Option<Vec<f64>>,
    },
    /// Run one of the experiments and emit its report.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Frechet,
    Hausdorff,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ExperimentName {
    Continuity,
    Gage,
    Angenent,
    Avoidance,
    Sandwich,
    Chord,
}

#[derive(Args, Clone)]
struct CurveArgs {
    /// Vertex count.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Fixed wave numbers, zero phase, e.g. `3` or `2,5`.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<u32>>,
    /// Number of random modes when `--modes` is absent.
    #[arg(long)]
    random_modes: Option<usize>,
    /// Colatitude of a latitude circle instead of a bisector.
    #[arg(long)]
    latitude: Option<f64>,
}

#[derive(Args, Clone)]
struct FlowArgs {
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    cfl: f64,
    #[arg(long, default_value_t = 50)]
    record_every: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    #[command(flatten)]
    curve: CurveArgs,
    #[command(flatten)]
    flow: FlowArgs,
    /// Continuity: decreasing perturbation amplitudes.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    amplitudes: Vec<f64>,
    /// Avoidance: colatitude of the second curve.
    #[arg(long, default_value_t = 1.6)]
    latitude2: f64,
    /// Sandwich: normal offset of the enclosing curves.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Chord: index of the vertex the chord starts from.
    #[arg(long, default_value_t = 0)]
    x_index: usize,
    #[arg(long)]
    tol_continuity: Option<f64>,
    #[arg(long)]
    tol_gage_final: Option<f64>,
    #[arg(long)]
    tol_monotone_slack: Option<f64>,
    #[arg(long)]
    tol_chord_area: Option<f64>,
    /// Report JSON path; standard output by default.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// CSV path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidParams(_) | Error::InvalidCurve(_) | Error::NonSimpleCurve => 2,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

fn input_error(what: &Path, e: io::Error) -> Fail {
    Fail(2, format!("{}: {e}", what.display()))
}

fn read_input(path: Option<&Path>) -> Result<String, Fail> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(|e| input_error(p, e)),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| input_error(Path::new("<stdin>"), e))?;
            Ok(s)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    let res = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Fail(1, format!("write failed: {e}")))
}

/// A curve JSON document, or the last curve of a trajectory.
fn read_curve_or_last(text: &str) -> Result<ClosedSphericalCurve, Fail> {
    match read_curve_json(text) {
        Ok(c) => Ok(c),
        Err(first) => match read_trajectory_jsonl(text.as_bytes()) {
            Ok(tr) if !tr.curves.is_empty() => Ok(tr.last_curve().clone()),
            _ => Err(first.into()),
        },
    }
}

impl CurveArgs {
    fn perturbation(&self, n: usize, amplitude: f64, modes: &[u32], seed: u64) -> PerturbationSpec {
        let seed = self.seed.unwrap_or(seed);
        let amplitude = self.amplitude.unwrap_or(amplitude);
        let n = self.n.unwrap_or(n);
        match (&self.modes, self.random_modes) {
            (Some(m), _) => PerturbationSpec::flower(n, amplitude, m, seed),
            (None, Some(k)) => PerturbationSpec::random(n, amplitude, k, seed),
            (None, None) if !modes.is_empty() => PerturbationSpec::flower(n, amplitude, modes, seed),
            (None, None) => PerturbationSpec::random(n, amplitude, 2, seed),
        }
    }

    /// Latitude circle (perturbed when the amplitude is non-zero) or bisector.
    fn spec(&self, amplitude: f64, modes: &[u32], seed: u64) -> CurveSpec {
        let p = self.perturbation(256, amplitude, modes, seed);
        match self.latitude {
            Some(theta) if p.amplitude == 0.0 => CurveSpec::Latitude { theta, n: p.n },
            Some(theta) => CurveSpec::PerturbedLatitude { theta, spec: p },
            None => CurveSpec::Bisector(p),
        }
    }
}

impl FlowArgs {
    fn params(&self, n: usize, t_end: f64) -> FlowParams {
        FlowParams {
            cfl_factor: self.cfl,
            resample_n: n,
            t_end: self.t_end.unwrap_or(t_end),
            record_every: self.record_every,
            ..FlowParams::default()
        }
    }
}

fn run_gen(curve: &CurveArgs, output: Option<&Path>) -> Result<(), Fail> {
    let c = curve.spec(0.0, &[], 0).generate()?;
    write_output(output, &(write_curve_json(&c) + "\n"))
}

fn run_evolve(input: Option<&Path>, n: Option<usize>, flow: &FlowArgs, output: Option<&Path>) -> Result<(), Fail> {
    let c = read_curve_json(&read_input(input)?)?;
    let params = flow.params(n.unwrap_or(c.len()), 1.0);
    let tr = evolve(&c, &params)?;
    let mut buf = Vec::new();
    write_trajectory_jsonl(&tr, &mut buf).expect("writing to memory");
    write_output(output, &String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn run_distance(metric: Metric, a: &Path, b: &Path) -> Result<(), Fail> {
    let a = read_curve_json(&read_input(Some(a))?)?;
    let b = read_curve_json(&read_input(Some(b))?)?;
    let d = match metric {
        Metric::Frechet => frechet_distance(&a, &b).distance,
        Metric::Hausdorff => hausdorff_distance(&a, &b),
    };
    println!("{d}");
    Ok(())
}

fn run_analyze(input: Option<&Path>, against: Option<&Path>, r: f64, pole: Option<&[f64]>) -> Result<(), Fail> {
    let c = read_curve_or_last(&read_input(input)?)?;
    let fitted = fit_great_circle(&c).ok();
    let reference = match pole {
        Some(v) => Some(GreatCircle::new(SpherePoint::new(v[0], v[1], v[2])?)),
        None => fitted,
    };
    let multiplicity = match &reference {
        Some(g) => {
            let m = r_multiplicity(&c, g, r)?;
            json!({ "r": r, "normal": g.normal.to_array(), "value": m.value, "components": m.components })
        }
        None => Value::Null,
    };
    let small = fit_small_circle(&c)
        .map(|s| json!({ "axis": s.axis.to_array(), "colatitude": s.colatitude, "cos_colatitude": s.colatitude.cos() }))
        .unwrap_or(Value::Null);
    let areas = enclosed_areas(&c).ok();
    let mut out = json!({
        "n": c.len(),
        "simple": is_simple(&c),
        "length": total_length(&c),
        "area_left": areas.map(|a| a.left),
        "area_right": areas.map(|a| a.right),
        "great_circle_normal": fitted.map(|g| g.normal.to_array()),
        "gage_residual": gage_residual(&c).ok(),
        "small_circle": small,
        "r_multiplicity": multiplicity,
    });
    if let Some(path) = against {
        let other = read_curve_or_last(&read_input(Some(path))?)?;
        let x = intersection_count(&c, &other);
        out["intersections"] = json!({ "count": x.count, "degenerate": x.degenerate });
    }
    println!("{}", to_json_string(&out));
    Ok(())
}

fn run_experiment(a: &ExperimentArgs) -> Result<bool, Fail> {
    let d = Tolerances::default();
    let tol = Tolerances {
        continuity: a.tol_continuity.unwrap_or(d.continuity),
        gage_final: a.tol_gage_final.unwrap_or(d.gage_final),
        monotone_slack: a.tol_monotone_slack.unwrap_or(d.monotone_slack),
        chord_area: a.tol_chord_area.unwrap_or(d.chord_area),
    };
    let cv = &a.curve;
    let report: ExperimentReport = match a.name {
        ExperimentName::Continuity => {
            let base = cv.perturbation(256, 0.1, &[], 11);
            exp_continuity(&base, &a.amplitudes, &a.flow.params(base.n, 1.0), &tol)?
        }
        ExperimentName::Gage => {
            let spec = cv.spec(0.3, &[], 0);
            let n = cv.n.unwrap_or(256);
            exp_gage(&spec, &a.flow.params(n, 3.0), &tol)?
        }
        ExperimentName::Angenent => {
            let n = cv.n.unwrap_or(256);
            let flower = cv.spec(0.2, &[3], 0);
            let equator = CurveSpec::Latitude { theta: std::f64::consts::FRAC_PI_2, n };
            exp_angenent(&flower, &equator, &a.flow.params(n, 1.5))?
        }
        ExperimentName::Avoidance => {
            let p = cv.perturbation(128, 0.1, &[], 0);
            let mut q = p.clone();
            q.seed = p.seed.wrapping_add(100);
            let theta = cv.latitude.unwrap_or(1.0);
            let first = CurveSpec::PerturbedLatitude { theta, spec: p.clone() };
            let second = CurveSpec::PerturbedLatitude { theta: a.latitude2, spec: q };
            exp_avoidance(&first, &second, &a.flow.params(p.n, 1.0))?
        }
        ExperimentName::Sandwich => {
            let spec = cv.spec(0.2, &[], 0);
            let n = cv.n.unwrap_or(256);
            exp_sandwich(&spec, a.delta, &a.flow.params(n, 1.0))?
        }
        ExperimentName::Chord => exp_crossing_chord(&cv.spec(0.1, &[3], 0), a.x_index, &tol)?,
    };
    write_output(a.output.as_deref(), &(report.to_json() + "\n"))?;
    let csv_path = a.csv.clone().or_else(|| a.output.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        fs::write(&p, report.to_csv()).map_err(|e| Fail(1, format!("{}: {e}", p.display())))?;
    }
    if !report.pass {
        eprintln!("experiment {} failed", report.name);
    }
    Ok(report.pass)
}

fn run(cli: Cli) -> Result<bool, Fail> {
    match cli.command {
        Command::Gen { curve, output } => run_gen(&curve, output.as_deref()).map(|_| true),
        Command::Evolve { input, n, flow, output } => {
            run_evolve(input.as_deref(), n, &flow, output.as_deref()).map(|_| true)
        }
        Command::Distance { metric, a, b } => run_distance(metric, &a, &b).map(|_| true),
        Command::Analyze { input, against, r, pole } => {
            run_analyze(input.as_deref(), against.as_deref(), r, pole.as_deref()).map(|_| true)
        }
        Command::Experiment(args) => run_experiment(&args),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on bad arguments.
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail(code, msg)) => {
            eprintln!("csflab: {msg}");
            ExitCode::from(code)
        }
    }
}
