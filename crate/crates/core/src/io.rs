//! File formats: curve JSON, trajectory JSONL, experiment report JSON and CSV.
//!
//! Every float is written with 17 significant digits so that output is
//! byte-reproducible and round-trips exactly.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::curve::ClosedSphericalCurve;
use crate::error::{Error, Result};
use crate::flow::{DiagnosticsRecord, TerminalStatus, Trajectory};
use crate::sphgeo::SpherePoint;

/// serde_json formatter that prints floats as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sig17Formatter;

impl serde_json::ser::Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as compact JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser).expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve_to_value(c: &ClosedSphericalCurve) -> Value {
    json!({ "points": c.vertices().iter().map(|p| p.to_array().to_vec()).collect::<Vec<_>>() })
}

pub fn write_curve_json(c: &ClosedSphericalCurve) -> String {
    to_json_string(&curve_to_value(c))
}

pub fn curve_from_value(v: &Value) -> Result<ClosedSphericalCurve> {
    let rows = v
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("expected an object with a \"points\" array".into()))?;
    let mut pts = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let xyz: Vec<f64> = row
            .as_array()
            .filter(|r| r.len() == 3)
            .and_then(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| Error::Parse(format!("point {i} is not a triple of numbers")))?;
        let p = SpherePoint::new(xyz[0], xyz[1], xyz[2]).map_err(|e| Error::Parse(format!("point {i}: {e}")))?;
        pts.push(p);
    }
    ClosedSphericalCurve::polygon(pts).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_curve_json(text: &str) -> Result<ClosedSphericalCurve> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    curve_from_value(&v)
}

fn diag_value(d: &DiagnosticsRecord) -> Value {
    json!({
        "length": d.length,
        "area_left": d.area_left,
        "max_curv": d.max_abs_curvature,
        "gage_residual": d.gage_residual,
    })
}

fn status_value(s: &TerminalStatus) -> Value {
    match s {
        TerminalStatus::ReachedEnd => json!({ "status": "ReachedEnd" }),
        TerminalStatus::Singular(t) => json!({ "status": "Singular", "t": t }),
        TerminalStatus::NonSimple(t) => json!({ "status": "NonSimple", "t": t }),
    }
}

/// One line per record time, then a terminal status line.
pub fn write_trajectory_jsonl<W: Write>(tr: &Trajectory, mut out: W) -> io::Result<()> {
    for ((t, c), d) in tr.times.iter().zip(&tr.curves).zip(&tr.diagnostics) {
        let line = json!({ "t": t, "curve": curve_to_value(c), "diag": diag_value(d) });
        writeln!(out, "{}", to_json_string(&line))?;
    }
    writeln!(out, "{}", to_json_string(&status_value(&tr.terminal_status)))
}

pub fn read_trajectory_jsonl<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut curves = Vec::new();
    let mut diagnostics = Vec::new();
    let mut status = None;
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
        if let Some(s) = v.get("status").and_then(Value::as_str) {
            let t = v.get("t").and_then(Value::as_f64).unwrap_or(f64::NAN);
            status = Some(match s {
                "ReachedEnd" => TerminalStatus::ReachedEnd,
                "Singular" => TerminalStatus::Singular(t),
                "NonSimple" => TerminalStatus::NonSimple(t),
                other => return Err(Error::Parse(format!("unknown status {other}"))),
            });
            continue;
        }
        let t = v.get("t").and_then(Value::as_f64).ok_or_else(|| Error::Parse(format!("line {}: missing t", k + 1)))?;
        let c = curve_from_value(v.get("curve").unwrap_or(&Value::Null))?;
        let d = v.get("diag").ok_or_else(|| Error::Parse(format!("line {}: missing diag", k + 1)))?;
        let num = |key: &str| d.get(key).and_then(Value::as_f64);
        diagnostics.push(DiagnosticsRecord {
            length: num("length").ok_or_else(|| Error::Parse("diag.length".into()))?,
            area_left: num("area_left").ok_or_else(|| Error::Parse("diag.area_left".into()))?,
            max_abs_curvature: num("max_curv").ok_or_else(|| Error::Parse("diag.max_curv".into()))?,
            gage_residual: num("gage_residual"),
        });
        times.push(t);
        curves.push(c);
    }
    let terminal_status = status.ok_or_else(|| Error::Parse("missing terminal status line".into()))?;
    Ok(Trajectory { times, curves, diagnostics, terminal_status })
}
