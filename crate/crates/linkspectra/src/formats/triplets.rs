//! Weighted `(t, u, v[, w])` records.

use std::collections::HashMap;
use std::io::{BufRead, Read};
use std::path::Path;
use std::sync::Arc;

use linkspectra_core::{LinkStreamMatrix, RealMatrix, RelationSpace};
use serde::{Deserialize, Serialize};

use super::Window;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub line: u64,
    pub t: i64,
    pub u: String,
    pub v: String,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Nonzero entries of the resulting matrix.
    pub records: usize,
    /// Records (or nonzero entries) outside the window.
    pub dropped: usize,
    pub vertices: usize,
}

fn malformed(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Malformed { path: path.to_path_buf(), line, message: message.into() }
}

fn parse_weight(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|w| w.is_finite())
}

/// CSV rows `t,u,v[,w]`; an optional header row starting with `t` is skipped.
pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<Triplet>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if out.is_empty() && i == 0 && rec.get(0).is_some_and(|f| f.eq_ignore_ascii_case("t")) {
            continue;
        }
        if !(3..=4).contains(&rec.len()) {
            return Err(malformed(path, line, format!("expected 3 or 4 fields, found {}", rec.len())));
        }
        let t = rec[0].parse().map_err(|_| malformed(path, line, format!("bad time `{}`", &rec[0])))?;
        let w = match rec.get(3) {
            Some(w) => parse_weight(w).ok_or_else(|| malformed(path, line, format!("bad weight `{w}`")))?,
            None => 1.0,
        };
        out.push(Triplet { line, t, u: rec[1].to_string(), v: rec[2].to_string(), w });
    }
    Ok(out)
}

#[derive(Deserialize)]
struct JsonRecord {
    t: i64,
    u: serde_json::Value,
    v: serde_json::Value,
    #[serde(default)]
    w: Option<f64>,
}

fn vertex_name(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// One JSON object `{"t": .., "u": .., "v": .., "w": ..}` per line.
pub fn read_ndjson<R: BufRead>(reader: R, path: &Path) -> Result<Vec<Triplet>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let n = i as u64 + 1;
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| malformed(path, n, e.to_string()))?;
        let u = vertex_name(&rec.u).ok_or_else(|| malformed(path, n, "vertex must be a string or number"))?;
        let v = vertex_name(&rec.v).ok_or_else(|| malformed(path, n, "vertex must be a string or number"))?;
        let w = rec.w.unwrap_or(1.0);
        if !w.is_finite() {
            return Err(malformed(path, n, "weight is not finite"));
        }
        out.push(Triplet { line: n, t: rec.t, u, v, w });
    }
    Ok(out)
}

/// Build the stream over the full space of the in-window vertices.
///
/// Vertices are numbered in first-seen order, relations are `(u, v)` in
/// lexicographic index order, and duplicate records are summed. Without a
/// window, the window spans the smallest to the largest time.
pub fn assemble(records: &[Triplet], window: Option<Window>, path: &Path) -> Result<(LinkStreamMatrix, IngestReport)> {
    if records.is_empty() {
        return Err(CliError::format(path, "input holds no records"));
    }
    let window = window.unwrap_or_else(|| {
        let lo = records.iter().map(|r| r.t).min().unwrap_or(0);
        let hi = records.iter().map(|r| r.t).max().unwrap_or(0);
        Window { t0: lo, len: (hi - lo) as usize + 1 }
    });
    let (inside, outside): (Vec<&Triplet>, Vec<&Triplet>) = records.iter().partition(|r| window.contains(r.t));
    if inside.is_empty() {
        return Err(CliError::format(path, format!("no records inside window {window}")));
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut labels = Vec::new();
    for r in &inside {
        for name in [r.u.as_str(), r.v.as_str()] {
            if !ids.contains_key(name) {
                ids.insert(name, labels.len());
                labels.push(name.to_string());
            }
        }
    }
    let space = RelationSpace::full_labeled(labels).map_err(|e| CliError::format(path, e.to_string()))?;
    let n = space.num_vertices();
    let mut values = RealMatrix::zeros(window.len, space.len());
    for r in &inside {
        let col = ids[r.u.as_str()] * n + ids[r.v.as_str()];
        let row = (r.t - window.t0) as usize;
        values.set(row, col, values.get(row, col) + r.w);
    }
    let vertices = space.num_active_vertices();
    let stream = LinkStreamMatrix::new(window.t0, Arc::new(space), values)?;
    let nonzero = stream.values().as_slice().iter().filter(|&&v| v != 0.0).count();
    Ok((stream, IngestReport { records: nonzero, dropped: outside.len(), vertices }))
}
