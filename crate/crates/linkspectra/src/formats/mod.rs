//! File formats: triplet ingestion, dense stream files, partition trees and
//! coefficient tables.

pub mod stream_file;
pub mod tables;
pub mod tree;
pub mod triplets;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use linkspectra_core::{LinkStreamMatrix, RealMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub use triplets::IngestReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ndjson,
    Raw,
}

impl Format {
    /// Guess from the file extension; anything unknown is read as CSV.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ndjson" | "jsonl") => Format::Ndjson,
            Some("bin" | "raw") => Format::Raw,
            _ => Format::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Ndjson => "ndjson",
            Format::Raw => "bin",
        }
    }
}

/// Observation window `[t0, t0 + len)`, written `t0:len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub t0: i64,
    pub len: usize,
}

impl Window {
    pub fn contains(&self, t: i64) -> bool {
        t >= self.t0 && t - self.t0 < self.len as i64
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected t0:T, got `{s}`"))?;
        let t0 = a.trim().parse().map_err(|_| format!("bad window start `{a}`"))?;
        let len: usize = b.trim().parse().map_err(|_| format!("bad window length `{b}`"))?;
        if len == 0 {
            return Err("window length must be positive".into());
        }
        Ok(Window { t0, len })
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.t0, self.len)
    }
}

/// Fixed float formatting: 17 significant digits, exact zeros as `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Read a stream from triplets or a dense stream file.
///
/// CSV input is dense when its header starts with `t` followed by relation
/// labels, and triplets otherwise.
pub fn read_stream(path: &Path, format: Option<Format>, window: Option<Window>) -> Result<(LinkStreamMatrix, IngestReport)> {
    let format = format.unwrap_or_else(|| Format::infer(path));
    match format {
        Format::Raw => {
            let stream = stream_file::read_raw(open(path)?, path)?;
            Ok(apply_window(stream, window))
        }
        Format::Ndjson => {
            let records = triplets::read_ndjson(open(path)?, path)?;
            triplets::assemble(&records, window, path)
        }
        Format::Csv => {
            let mut reader = open(path)?;
            if stream_file::is_dense_csv(reader.fill_buf().map_err(|e| CliError::io(path, e))?) {
                let stream = stream_file::read_csv(reader, path)?;
                Ok(apply_window(stream, window))
            } else {
                let records = triplets::read_csv(reader, path)?;
                triplets::assemble(&records, window, path)
            }
        }
    }
}

/// Re-window a dense stream; rows outside the new window are dropped and
/// missing rows are zero.
pub fn apply_window(stream: LinkStreamMatrix, window: Option<Window>) -> (LinkStreamMatrix, IngestReport) {
    let m = stream.len_m();
    let nonzero = |s: &LinkStreamMatrix| s.values().as_slice().iter().filter(|&&v| v != 0.0).count();
    let Some(w) = window else {
        let records = nonzero(&stream);
        let vertices = stream.space().num_active_vertices();
        return (stream, IngestReport { records, dropped: 0, vertices });
    };
    let mut values = RealMatrix::zeros(w.len, m);
    let mut dropped = 0;
    for (row, t) in stream.times().enumerate() {
        let src = stream.values().row(row);
        if w.contains(t) {
            values.row_mut((t - w.t0) as usize).copy_from_slice(src);
        } else {
            dropped += src.iter().filter(|&&v| v != 0.0).count();
        }
    }
    let space = Arc::clone(stream.space());
    let vertices = space.num_active_vertices();
    let out = LinkStreamMatrix::new(w.t0, space, values).expect("window shape matches space");
    let records = nonzero(&out);
    (out, IngestReport { records, dropped, vertices })
}
