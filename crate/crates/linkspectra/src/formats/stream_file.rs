//! Dense stream files: CSV with a `t,<relation labels>` header, and a raw
//! little-endian layout behind a one-line JSON header.

use std::io::{BufRead, Read, Write};
use std::path::Path;
use std::sync::Arc;

use linkspectra_core::{LinkStreamMatrix, RealMatrix, RelationSpace};
use serde::{Deserialize, Serialize};

use super::fmt_f64;
use crate::error::{CliError, Result};

/// `true` when the first line looks like a dense header.
pub fn is_dense_csv(head: &[u8]) -> bool {
    let line = head.split(|&b| b == b'\n').next().unwrap_or_default();
    let line = String::from_utf8_lossy(line);
    let mut fields = line.trim_end().split(',');
    fields.next().map(str::trim) == Some("t")
        && fields.next().is_some_and(|f| f.contains("->") || f.starts_with('~'))
}

pub fn write_csv<W: Write>(stream: &LinkStreamMatrix, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(stream.space().relation_labels());
    w.write_record(&header)?;
    for (row, t) in stream.times().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(stream.values().row(row).iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn read_csv<R: Read>(reader: R, path: &Path) -> Result<LinkStreamMatrix> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = csv.headers().map_err(|e| CliError::format(path, e.to_string()))?.clone();
    let labels: Vec<&str> = header.iter().skip(1).collect();
    let space = RelationSpace::from_relation_labels(&labels).map_err(|e| CliError::format(path, e.to_string()))?;
    let m = space.len();
    let mut data = Vec::new();
    let mut t0 = None;
    let mut rows = 0usize;
    for rec in csv.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Malformed { path: path.to_path_buf(), line, message: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Malformed { path: path.to_path_buf(), line, message };
        let t: i64 = rec[0].parse().map_err(|_| bad(format!("bad time `{}`", &rec[0])))?;
        let start = *t0.get_or_insert(t);
        if t != start + rows as i64 {
            return Err(bad(format!("expected time {}, found {t}", start + rows as i64)));
        }
        for f in rec.iter().skip(1) {
            let v: f64 = f.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| bad(format!("bad value `{f}`")))?;
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::format(path, "stream file holds no rows"));
    }
    let values = RealMatrix::from_vec(rows, m, data)?;
    Ok(LinkStreamMatrix::new(t0.unwrap_or(0), Arc::new(space), values)?)
}

#[derive(Serialize, Deserialize)]
struct RawHeader {
    t0: i64,
    len: usize,
    labels: Vec<String>,
}

pub fn write_raw<W: Write>(stream: &LinkStreamMatrix, mut out: W) -> std::io::Result<()> {
    let header = RawHeader { t0: stream.t0(), len: stream.len_t(), labels: stream.space().relation_labels() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in stream.values().as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_raw<R: BufRead>(mut reader: R, path: &Path) -> Result<LinkStreamMatrix> {
    let mut line = String::new();
    reader.read_line(&mut line).map_err(|e| CliError::io(path, e))?;
    let header: RawHeader =
        serde_json::from_str(&line).map_err(|e| CliError::format(path, format!("bad raw header: {e}")))?;
    let space = RelationSpace::from_relation_labels(&header.labels).map_err(|e| CliError::format(path, e.to_string()))?;
    let n = header.len * space.len();
    let mut bytes = Vec::with_capacity(n * 8);
    reader.read_to_end(&mut bytes).map_err(|e| CliError::io(path, e))?;
    if bytes.len() != n * 8 {
        return Err(CliError::format(path, format!("expected {} payload bytes, found {}", n * 8, bytes.len())));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let values = RealMatrix::from_vec(header.len, space.len(), data)?;
    Ok(LinkStreamMatrix::new(header.t0, Arc::new(space), values)?)
}
