use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::{format_f64, to_json_string};

/// One record of an experiment: named scalar columns in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row(pub Vec<(String, f64)>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub inputs: Value,
    pub tolerances: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
    pub pass: bool,
}

impl Serialize for ExperimentReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("name", &self.name)?;
        m.serialize_entry("inputs", &self.inputs)?;
        m.serialize_entry("tolerances", &self.tolerances)?;
        m.serialize_entry("rows", &self.rows)?;
        m.serialize_entry("pass", &self.pass)?;
        m.end()
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    /// Recomputes the verdict from the rows and tolerances alone.
    pub fn recheck(&self) -> bool {
        super::experiments::verdict(&self.name, &self.rows, &self.tolerances)
    }

    /// One line per row; columns from the first row. NaN cells are empty.
    pub fn to_csv(&self) -> String {
        let Some(first) = self.rows.first() else {
            return String::new();
        };
        let mut out = first.0.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> =
                row.0.iter().map(|(_, v)| if v.is_finite() { format_f64(*v) } else { String::new() }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Parse(format!("missing {k}")));
        let name = field("name")?.as_str().ok_or_else(|| Error::Parse("name".into()))?.to_string();
        let tolerances = field("tolerances")?
            .as_object()
            .ok_or_else(|| Error::Parse("tolerances".into()))?
            .iter()
            .map(|(k, x)| x.as_f64().map(|f| (k.clone(), f)).ok_or_else(|| Error::Parse(k.clone())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let rows = field("rows")?
            .as_array()
            .ok_or_else(|| Error::Parse("rows".into()))?
            .iter()
            .map(|r| {
                let obj = r.as_object().ok_or_else(|| Error::Parse("row".into()))?;
                Ok(Row(obj.iter().map(|(k, x)| (k.clone(), x.as_f64().unwrap_or(f64::NAN))).collect()))
            })
            .collect::<Result<Vec<_>>>()?;
        let pass = field("pass")?.as_bool().ok_or_else(|| Error::Parse("pass".into()))?;
        Ok(ExperimentReport { name, inputs: field("inputs")?.clone(), tolerances, rows, pass })
    }
}
