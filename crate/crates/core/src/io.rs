//! Degree-file parsing and JSON helpers shared by the CLI and the bindings.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Deserialize)]
struct DegreeFile {
    n: Option<usize>,
    degrees: Vec<usize>,
}

/// Parses either a JSON object `{"n": .., "degrees": [..]}` or plain text with
/// integers separated by whitespace and/or commas. `#` starts a comment.
pub fn parse_degrees(text: &str) -> Result<Vec<usize>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let file: DegreeFile = serde_json::from_str(trimmed)?;
        if let Some(n) = file.n {
            if n != file.degrees.len() {
                return Err(Error::Parse(format!(
                    "n = {n} but {} degrees given",
                    file.degrees.len()
                )));
            }
        }
        return Ok(file.degrees);
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let k = tok
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("not a non-negative integer: {tok:?}")))?;
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(Error::Empty);
    }
    Ok(out)
}

pub fn read_degree_file(path: &Path) -> Result<Vec<usize>> {
    parse_degrees(&std::fs::read_to_string(path)?)
}

/// Serialises `value` as a JSON object with a leading `"schema"` field.
pub fn with_schema<T: Serialize>(schema: &str, value: &T) -> Result<serde_json::Value> {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), schema.into());
    match serde_json::to_value(value)? {
        serde_json::Value::Object(obj) => map.extend(obj),
        other => {
            map.insert("value".into(), other);
        }
    }
    Ok(serde_json::Value::Object(map))
}

/// Row-major nested arrays.
pub fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Formats an optional float for CSV (empty when absent).
pub(crate) fn csv_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}
