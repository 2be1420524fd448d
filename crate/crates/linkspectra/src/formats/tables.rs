//! Coefficient grids, long-form complex coefficients and filter files.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use linkspectra_core::{CoefficientKind, Complex64, ComplexMatrix, FourierBasis, FrequencyFilter, GraphBasis, RealMatrix, StructuralResponse};

use super::{fmt_f64, open};
use crate::error::{CliError, Result};

/// `s<j>_<k>` for scaling and `w<l>_<k>` for wavelet coefficients.
pub fn basis_label(kind: CoefficientKind) -> String {
    match kind {
        CoefficientKind::Scaling { level, k } => format!("s{level}_{k}"),
        CoefficientKind::Wavelet { level, k } => format!("w{level}_{k}"),
    }
}

pub fn parse_basis_label(s: &str) -> Option<CoefficientKind> {
    let (head, k) = s.split_once('_')?;
    let k = k.parse().ok()?;
    let level = head.get(1..)?.parse().ok()?;
    match head.as_bytes().first()? {
        b's' => Some(CoefficientKind::Scaling { level, k }),
        b'w' => Some(CoefficientKind::Wavelet { level, k }),
        _ => None,
    }
}

pub fn basis_labels(basis: &GraphBasis) -> Vec<String> {
    (0..basis.len()).map(|i| basis_label(basis.kind(i))).collect()
}

/// Table with a labelled first column.
pub fn write_grid<W: Write>(out: W, corner: &str, rows: &[String], cols: &[String], values: &RealMatrix) -> std::io::Result<()> {
    debug_assert_eq!((rows.len(), cols.len()), (values.rows(), values.cols()));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(corner).chain(cols.iter().map(String::as_str)))?;
    for (i, r) in rows.iter().enumerate() {
        let rec: Vec<String> = std::iter::once(r.clone()).chain(values.row(i).iter().map(|&v| fmt_f64(v))).collect();
        w.write_record(&rec)?;
    }
    w.flush()
}

/// Inverse of [`write_grid`]: `(row labels, column labels, values)`.
pub fn read_grid<R: Read>(reader: R, path: &Path) -> Result<(Vec<String>, Vec<String>, RealMatrix)> {
    let mut csv = csv::Reader::from_reader(reader);
    let cols: Vec<String> = csv.headers().map_err(|e| CliError::format(path, e.to_string()))?.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for rec in csv.records() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        rows.push(rec[0].to_string());
        for f in rec.iter().skip(1) {
            data.push(f.parse().map_err(|_| CliError::format(path, format!("bad value `{f}`")))?);
        }
    }
    let values = RealMatrix::from_vec(rows.len(), cols.len(), data)?;
    Ok((rows, cols, values))
}

pub fn frequency_labels(time: &FourierBasis) -> Vec<String> {
    (0..time.len()).map(|u| u.to_string()).collect()
}

/// One row per coefficient: `u,freq,element,re,im`.
pub fn write_coefficients<W: Write>(out: W, c: &ComplexMatrix, time: &FourierBasis, labels: &[String]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "freq", "element", "re", "im"])?;
    for u in 0..c.rows() {
        let freq = fmt_f64(time.frequency(u));
        for (k, label) in labels.iter().enumerate() {
            let z = c.get(u, k);
            w.write_record([u.to_string(), freq.clone(), label.clone(), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    w.flush()
}

/// Frequency response file with columns `u,re[,im]`, one row per frequency.
pub fn read_frequency_filter(path: &Path, len: usize) -> Result<FrequencyFilter> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(open(path)?);
    let mut response: Vec<Option<Complex64>> = vec![None; len];
    for rec in csv.records() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Malformed { path: path.to_path_buf(), line, message };
        let u: usize = rec.get(0).and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad frequency index".into()))?;
        if u >= len {
            return Err(bad(format!("frequency index {u} outside 0..{len}")));
        }
        let re: f64 = rec.get(1).and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad real part".into()))?;
        let im: f64 = match rec.get(2) {
            Some(f) => f.parse().map_err(|_| bad("bad imaginary part".into()))?,
            None => 0.0,
        };
        if response[u].replace(Complex64::new(re, im)).is_some() {
            return Err(bad(format!("frequency index {u} given twice")));
        }
    }
    let response: Option<Vec<Complex64>> = response.into_iter().collect();
    let response = response.ok_or_else(|| CliError::format(path, format!("filter must give all {len} frequencies")))?;
    Ok(FrequencyFilter::new(response))
}

/// Structural response file with columns `element,value`; unlisted basis
/// functions pass unchanged.
pub fn read_structural_response(path: &Path, basis: &GraphBasis) -> Result<StructuralResponse> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let mut values = vec![1.0; basis.len()];
    let mut seen = HashMap::new();
    for rec in csv.records() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| CliError::Malformed { path: path.to_path_buf(), line, message };
        let label = rec.get(0).unwrap_or_default();
        let index = parse_basis_label(label)
            .and_then(|kind| basis.index_of(kind))
            .ok_or_else(|| bad(format!("`{label}` is not a basis element at level {}", basis.level())))?;
        let v: f64 = rec.get(1).and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad value".into()))?;
        if seen.insert(index, ()).is_some() {
            return Err(bad(format!("`{label}` given twice")));
        }
        values[index] = v;
    }
    Ok(StructuralResponse::new(values))
}
