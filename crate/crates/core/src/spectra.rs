//! Joint frequency-structure decomposition of link streams.
//!
//! With `Ψ` the unitary DFT along time and `Φ` the graph basis, the
//! coefficient matrix is `C = Ψ* L Φᵀ`; row `u` is a frequency, column `k` a
//! basis element. Time operators act from the left (`H L`), graph operators
//! from the right (`L Q`).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_complex::Complex64;

use crate::dense::{ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};
use crate::graph_basis::{GraphBasis, StructuralResponse};
use crate::partition::{partition_svd, SvdOptions};
use crate::stream::LinkStreamMatrix;
use crate::time_basis::{real_part_checked, CirculantOperator, FourierBasis, FrequencyFilter};

/// The pair `(Ψ, Φ)` used to decompose a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamBases {
    pub graph: GraphBasis,
    pub time: FourierBasis,
}

impl StreamBases {
    pub fn new(graph: GraphBasis, time: FourierBasis) -> Self {
        Self { graph, time }
    }

    /// Bases for `l`: `Φ` from SVD bisection of the whole-window aggregate
    /// graph, at `level` (default the coarsest).
    pub fn from_aggregate(l: &LinkStreamMatrix, level: Option<u32>, options: &SvdOptions) -> Result<Self> {
        let (_, tree) = partition_svd(&l.aggregate_graph(), options)?;
        let tree = Arc::new(tree);
        let graph = match level {
            Some(j) => GraphBasis::new(tree, j)?,
            None => GraphBasis::coarsest(tree),
        };
        Ok(Self { graph, time: FourierBasis::new(l.len_t())? })
    }

    fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if rows != self.time.len() {
            return Err(Error::DimensionMismatch { what: "time samples", expected: self.time.len(), found: rows });
        }
        if cols != self.graph.len() {
            return Err(Error::DimensionMismatch { what: "relations", expected: self.graph.len(), found: cols });
        }
        Ok(())
    }
}

/// `X = L Φᵀ`: row `t` holds the coefficients of `G_t`.
pub fn time_structure(l: &RealMatrix, basis: &GraphBasis) -> Result<RealMatrix> {
    if l.cols() != basis.len() {
        return Err(Error::DimensionMismatch { what: "relations", expected: basis.len(), found: l.cols() });
    }
    let mut x = RealMatrix::zeros(l.rows(), l.cols());
    for t in 0..l.rows() {
        let coeffs = basis.analyze_values(l.row(t));
        x.row_mut(t).copy_from_slice(&coeffs);
    }
    Ok(x)
}

/// Split `X = [S, W]` into scaling and wavelet columns.
pub fn split_scaling(x: &RealMatrix, basis: &GraphBasis) -> (RealMatrix, RealMatrix) {
    let ns = basis.num_scaling();
    let s = RealMatrix::from_fn(x.rows(), ns, |t, k| x.get(t, k));
    let w = RealMatrix::from_fn(x.rows(), x.cols() - ns, |t, k| x.get(t, ns + k));
    (s, w)
}

/// `F = Ψ* L`.
pub fn freq_relational(l: &RealMatrix, basis: &FourierBasis) -> Result<ComplexMatrix> {
    basis.forward(l)
}

fn analyze_complex_rows(m: &ComplexMatrix, basis: &GraphBasis) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for r in 0..m.rows() {
        let re: Vec<f64> = m.row(r).iter().map(|c| c.re).collect();
        let im: Vec<f64> = m.row(r).iter().map(|c| c.im).collect();
        let (a, b) = (basis.analyze_values(&re), basis.analyze_values(&im));
        for (o, (x, y)) in out.row_mut(r).iter_mut().zip(a.into_iter().zip(b)) {
            *o = Complex64::new(x, y);
        }
    }
    out
}

fn synthesize_complex_rows(m: &ComplexMatrix, basis: &GraphBasis) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for r in 0..m.rows() {
        let re: Vec<f64> = m.row(r).iter().map(|c| c.re).collect();
        let im: Vec<f64> = m.row(r).iter().map(|c| c.im).collect();
        let (a, b) = (basis.synthesize_values(&re), basis.synthesize_values(&im));
        for (o, (x, y)) in out.row_mut(r).iter_mut().zip(a.into_iter().zip(b)) {
            *o = Complex64::new(x, y);
        }
    }
    out
}

/// Frequency × basis-element coefficients of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    values: ComplexMatrix,
}

impl CoefficientMatrix {
    pub fn new(values: ComplexMatrix) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    pub fn into_values(self) -> ComplexMatrix {
        self.values
    }

    pub fn magnitudes(&self) -> RealMatrix {
        self.values.abs()
    }

    pub fn get(&self, u: usize, k: usize) -> Complex64 {
        self.values.get(u, k)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.frobenius_norm()
    }

    /// Entries with `|C| > threshold`, in row-major order.
    pub fn support(&self, threshold: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.values.rows() {
            for (k, c) in self.values.row(u).iter().enumerate() {
                if c.norm() > threshold {
                    out.push((u, k));
                }
            }
        }
        out
    }
}

/// `C = Ψ* (L Φᵀ)`: graph transform first, then time.
pub fn decompose(l: &RealMatrix, bases: &StreamBases) -> Result<CoefficientMatrix> {
    bases.check(l.rows(), l.cols())?;
    let x = time_structure(l, &bases.graph)?;
    Ok(CoefficientMatrix { values: bases.time.forward(&x)? })
}

/// `C = (Ψ* L) Φᵀ`: time transform first, then graph.
pub fn decompose_time_first(l: &RealMatrix, bases: &StreamBases) -> Result<CoefficientMatrix> {
    bases.check(l.rows(), l.cols())?;
    let f = bases.time.forward(l)?;
    Ok(CoefficientMatrix { values: analyze_complex_rows(&f, &bases.graph) })
}

/// `Ψ C Φ`, complex.
pub fn reconstruct_complex(c: &CoefficientMatrix, bases: &StreamBases) -> Result<ComplexMatrix> {
    bases.check(c.values.rows(), c.values.cols())?;
    let x = bases.time.inverse(&c.values)?;
    Ok(synthesize_complex_rows(&x, &bases.graph))
}

/// `Ψ C Φ`; errors when the imaginary residue is not negligible.
pub fn reconstruct(c: &CoefficientMatrix, bases: &StreamBases) -> Result<RealMatrix> {
    real_part_checked(&reconstruct_complex(c, bases)?)
}

/// Diagonal responses `(Λ_H, Λ_Q)` applied as `Ψ Λ_H C Λ_Q Φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFilter {
    pub freq: FrequencyFilter,
    pub structural: StructuralResponse,
}

impl JointFilter {
    pub fn new(freq: FrequencyFilter, structural: StructuralResponse) -> Self {
        Self { freq, structural }
    }

    pub fn identity(bases: &StreamBases) -> Self {
        Self {
            freq: FrequencyFilter::all_pass(bases.time.len()),
            structural: StructuralResponse::identity(&bases.graph),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { freq: self.freq.product(&other.freq), structural: self.structural.product(&other.structural) }
    }

    fn check(&self, bases: &StreamBases) -> Result<()> {
        if self.freq.len() != bases.time.len() {
            return Err(Error::DimensionMismatch {
                what: "frequency response",
                expected: bases.time.len(),
                found: self.freq.len(),
            });
        }
        if self.structural.len() != bases.graph.len() {
            return Err(Error::DimensionMismatch {
                what: "structural response",
                expected: bases.graph.len(),
                found: self.structural.len(),
            });
        }
        Ok(())
    }

    /// Scale row `u` of `C` by `χ_u` and column `k` by the structural response.
    pub fn apply_coefficients(&self, c: &CoefficientMatrix) -> CoefficientMatrix {
        let mut v = c.values.clone();
        let sr = self.structural.values();
        for (u, &chi) in self.freq.response().iter().enumerate() {
            for (x, &s) in v.row_mut(u).iter_mut().zip(sr) {
                *x *= chi * s;
            }
        }
        CoefficientMatrix { values: v }
    }

    /// `Ψ Λ_H C Λ_Q Φ`.
    pub fn apply(&self, l: &RealMatrix, bases: &StreamBases) -> Result<RealMatrix> {
        self.check(bases)?;
        let c = decompose(l, bases)?;
        reconstruct(&self.apply_coefficients(&c), bases)
    }

    /// `H^(filt) L Q^(filt)` applied one operator at a time.
    pub fn apply_sequential(&self, l: &RealMatrix, bases: &StreamBases) -> Result<RealMatrix> {
        self.check(bases)?;
        let h = self.freq.apply(&bases.time, l)?;
        let mut out = RealMatrix::zeros(h.rows(), h.cols());
        for t in 0..h.rows() {
            let row = bases.graph.structural_filter_values(h.row(t), &self.structural);
            out.row_mut(t).copy_from_slice(&row);
        }
        Ok(out)
    }
}

/// Rule choosing which coefficients a backbone keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    All,
    /// The `k` largest `|C|` among frequencies `0..=T/2`, ties by `(u, k)`.
    TopK(usize),
    /// Inclusive frequency × basis-index box.
    Box { freq: RangeInclusive<usize>, basis: RangeInclusive<usize> },
}

/// Output of [`backbone`].
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    pub stream: RealMatrix,
    /// Row-major `T × M` mask of kept coefficients (conjugate partners included).
    pub kept: Vec<bool>,
    /// Selected one-sided entries `(u, k)`, in rank order for [`Selection::TopK`].
    pub selected: Vec<(usize, usize)>,
}

/// Keep the selected coefficients (and their conjugate partners) and reconstruct.
pub fn backbone(l: &RealMatrix, bases: &StreamBases, selection: &Selection) -> Result<Backbone> {
    let c = decompose(l, bases)?;
    let (t, m) = (c.values.rows(), c.values.cols());
    let half = t / 2;
    let selected: Vec<(usize, usize)> = match selection {
        Selection::All => (0..=half).flat_map(|u| (0..m).map(move |k| (u, k))).collect(),
        Selection::TopK(n) => {
            let mut ranked: Vec<(f64, usize, usize)> =
                (0..=half).flat_map(|u| (0..m).map(move |k| (u, k))).map(|(u, k)| (c.get(u, k).norm(), u, k)).collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            ranked.into_iter().take(*n).map(|(_, u, k)| (u, k)).collect()
        }
        Selection::Box { freq, basis } => {
            let us = *freq.start()..=(*freq.end()).min(t.saturating_sub(1));
            let ks = *basis.start()..=(*basis.end()).min(m.saturating_sub(1));
            us.flat_map(|u| ks.clone().map(move |k| (u, k))).collect()
        }
    };
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut kept = vec![false; t * m];
    for &(u, k) in &selected {
        kept[u * m + k] = true;
        kept[bases.time.partner(u) * m + k] = true;
    }
    let mut v = c.into_values();
    for (x, &keep) in v.as_mut_slice().iter_mut().zip(&kept) {
        if !keep {
            *x = Complex64::new(0.0, 0.0);
        }
    }
    let stream = reconstruct(&CoefficientMatrix::new(v), bases)?;
    Ok(Backbone { stream, kept, selected })
}

/// How time differences treat the window edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// `L_{−1} = L_{T−1}`: the wrap-around difference is counted.
    #[default]
    Circular,
    /// Only the `T − 1` interior differences.
    Linear,
}

/// `‖∂M/∂t‖²_F` under the given boundary.
pub fn time_variation(m: &RealMatrix, boundary: Boundary) -> Result<f64> {
    match boundary {
        Boundary::Circular => Ok(CirculantOperator::difference(m.rows())?.apply(m)?.frobenius_norm_sq()),
        Boundary::Linear => {
            let mut acc = 0.0;
            for t in 1..m.rows() {
                acc += m.row(t).iter().zip(m.row(t - 1)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
            Ok(acc)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Regularity {
    pub time: f64,
    pub edge: f64,
    pub total: f64,
}

/// `reg_t = ‖H^(diff) L‖²`, `reg_e = ‖L Q^(diff)‖²` and their sum.
pub fn regularity(l: &RealMatrix, basis: &GraphBasis, boundary: Boundary) -> Result<Regularity> {
    if l.cols() != basis.len() {
        return Err(Error::DimensionMismatch { what: "relations", expected: basis.len(), found: l.cols() });
    }
    let time = time_variation(l, boundary)?;
    let edge = (0..l.rows()).map(|t| basis.regularity_values(l.row(t))).sum();
    Ok(Regularity { time, edge, total: time + edge })
}

/// `reg_t(S) = ‖H^(diff) S‖²` on the scaling coefficients only.
pub fn relaxed_time_regularity(l: &RealMatrix, basis: &GraphBasis, boundary: Boundary) -> Result<f64> {
    let (s, _) = split_scaling(&time_structure(l, basis)?, basis);
    time_variation(&s, boundary)
}
