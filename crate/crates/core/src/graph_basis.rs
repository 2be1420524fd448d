//! Haar-style orthonormal basis for functions on the relation space.
//!
//! Given a [`PartitionTree`] and a resolution level `j`, the basis holds
//!
//! * `M / 2^j` scaling functions `φ_k^(j) = 2^{−j/2}·1[E_k^(j)]`, and
//! * for every `ℓ = 1..=j`, `M / 2^ℓ` wavelet functions `θ_k^(ℓ)` equal to
//!   `+2^{−ℓ/2}` on `E_{2k}^(ℓ−1)` and `−2^{−ℓ/2}` on `E_{2k+1}^(ℓ−1)`.
//!
//! Coefficient vectors are laid out as `x = [s, w]`: the scaling coefficients
//! first, then wavelet blocks from the coarsest level `j` down to level 1,
//! each block in increasing `k`. Transforms run on the leaf-ordered weight
//! vector with an `O(M)` Haar filter bank; [`GraphBasis::materialize`] gives
//! the dense `M × M` matrix `Φ` for checking.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;


use crate::dense::RealMatrix;
use crate::error::{Error, Result};
use crate::partition::PartitionTree;
use crate::stream::GraphSlice;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphBasis {
    tree: Arc<PartitionTree>,
    level: u32,
}

/// Which basis function a coefficient index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CoefficientKind {
    Scaling { level: u32, k: usize },
    Wavelet { level: u32, k: usize },
}

impl CoefficientKind {
    pub fn level(self) -> u32 {
        match self {
            CoefficientKind::Scaling { level, .. } | CoefficientKind::Wavelet { level, .. } => level,
        }
    }

    pub fn index(self) -> usize {
        match self {
            CoefficientKind::Scaling { k, .. } | CoefficientKind::Wavelet { k, .. } => k,
        }
    }

    pub fn is_scaling(self) -> bool {
        matches!(self, CoefficientKind::Scaling { .. })
    }
}

/// `2^{−level/2}`, exact for even levels.
fn haar_scale(level: u32) -> f64 {
    let s = libm::ldexp(1.0, -((level / 2) as i32));
    if level % 2 == 1 {
        s * core::f64::consts::FRAC_1_SQRT_2
    } else {
        s
    }
}

impl GraphBasis {
    pub fn new(tree: Arc<PartitionTree>, level: u32) -> Result<Self> {
        let max = tree.depth();
        if level > max {
            return Err(Error::InvalidLevel { level, max });
        }
        Ok(Self { tree, level })
    }

    /// Basis at the coarsest level `j = log2(M)`.
    pub fn coarsest(tree: Arc<PartitionTree>) -> Self {
        let level = tree.depth();
        Self { tree, level }
    }

    pub fn tree(&self) -> &Arc<PartitionTree> {
        &self.tree
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        Self::new(self.tree.clone(), level)
    }

    /// Dimension `M`.
    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn num_scaling(&self) -> usize {
        self.len() >> self.level
    }

    pub fn scaling_range(&self) -> Range<usize> {
        0..self.num_scaling()
    }

    /// Index range of the wavelet block at level `ℓ` (`1 ≤ ℓ ≤ j`).
    pub fn wavelet_range(&self, level: u32) -> Range<usize> {
        assert!(level >= 1 && level <= self.level, "wavelet level {level} outside 1..={}", self.level);
        // blocks for levels j, j-1, ..., ℓ+1 precede level ℓ
        let m = self.len();
        let start = self.num_scaling() + (level + 1..=self.level).map(|l| m >> l).sum::<usize>();
        start..start + (m >> level)
    }

    pub fn kind(&self, index: usize) -> CoefficientKind {
        assert!(index < self.len());
        let ns = self.num_scaling();
        if index < ns {
            return CoefficientKind::Scaling { level: self.level, k: index };
        }
        let mut start = ns;
        for level in (1..=self.level).rev() {
            let size = self.len() >> level;
            if index < start + size {
                return CoefficientKind::Wavelet { level, k: index - start };
            }
            start += size;
        }
        unreachable!()
    }

    /// Index of a basis function in the coefficient layout.
    pub fn index_of(&self, kind: CoefficientKind) -> Option<usize> {
        match kind {
            CoefficientKind::Scaling { level, k } => (level == self.level && k < self.num_scaling()).then_some(k),
            CoefficientKind::Wavelet { level, k } => {
                if level == 0 || level > self.level || k >= self.len() >> level {
                    return None;
                }
                Some(self.wavelet_range(level).start + k)
            }
        }
    }

    /// Coefficients of a weight vector given in relation (column) order.
    pub fn analyze_values(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len(), "weight vector length");
        let mut buf: Vec<f64> = self.tree.leaves().iter().map(|&r| f[r]).collect();
        let mut out = vec![0.0; self.len()];
        let mut n = self.len();
        let mut diffs = vec![0.0; n / 2];
        // unnormalized sums/differences, one scaling per coefficient at the end
        for level in 1..=self.level {
            let half = n / 2;
            for k in 0..half {
                let (a, b) = (buf[2 * k], buf[2 * k + 1]);
                buf[k] = a + b;
                diffs[k] = a - b;
            }
            let scale = haar_scale(level);
            let range = self.wavelet_range(level);
            for (o, d) in out[range].iter_mut().zip(&diffs[..half]) {
                *o = d * scale;
            }
            n = half;
        }
        let scale = haar_scale(self.level);
        for (o, s) in out[..n].iter_mut().zip(&buf[..n]) {
            *o = s * scale;
        }
        out
    }

    /// Inverse of [`analyze_values`](Self::analyze_values); output in relation order.
    pub fn synthesize_values(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len(), "coefficient vector length");
        let m = self.len();
        let mut buf = vec![0.0; m];
        let mut n = self.num_scaling();
        let inv = 1.0 / haar_scale(self.level);
        for (b, s) in buf[..n].iter_mut().zip(&x[..n]) {
            *b = s * inv;
        }
        let mut sums = vec![0.0; m / 2];
        for level in (1..=self.level).rev() {
            let inv = 1.0 / haar_scale(level);
            let range = self.wavelet_range(level);
            sums[..n].copy_from_slice(&buf[..n]);
            for (k, &w) in x[range].iter().enumerate() {
                let (s, d) = (sums[k], w * inv);
                buf[2 * k] = 0.5 * (s + d);
                buf[2 * k + 1] = 0.5 * (s - d);
            }
            n *= 2;
        }
        let mut f = vec![0.0; m];
        for (pos, &r) in self.tree.leaves().iter().enumerate() {
            f[r] = buf[pos];
        }
        f
    }

    pub fn analyze(&self, g: &GraphSlice) -> Result<GraphCoefficients> {
        self.check(g)?;
        Ok(GraphCoefficients { level: self.level, values: self.analyze_values(g.weights()) })
    }

    pub fn synthesize(&self, c: &GraphCoefficients, like: &GraphSlice) -> Result<GraphSlice> {
        self.check(like)?;
        if c.values.len() != self.len() || c.level != self.level {
            return Err(Error::DimensionMismatch {
                what: "graph coefficients",
                expected: self.len(),
                found: c.values.len(),
            });
        }
        GraphSlice::new(like.space().clone(), self.synthesize_values(&c.values))
    }

    fn check(&self, g: &GraphSlice) -> Result<()> {
        if g.weights().len() != self.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// Dense `Φ`: row `i` is the basis function of coefficient `i`, columns
    /// are relations.
    pub fn materialize(&self) -> RealMatrix {
        let m = self.len();
        let mut phi = RealMatrix::zeros(m, m);
        for i in 0..m {
            let row = phi.row_mut(i);
            match self.kind(i) {
                CoefficientKind::Scaling { level, k } => {
                    let a = haar_scale(level);
                    for &r in self.tree.set(level, k) {
                        row[r] = a;
                    }
                }
                CoefficientKind::Wavelet { level, k } => {
                    let a = haar_scale(level);
                    for &r in self.tree.set(level - 1, 2 * k) {
                        row[r] = a;
                    }
                    for &r in self.tree.set(level - 1, 2 * k + 1) {
                        row[r] = -a;
                    }
                }
            }
        }
        phi
    }

    /// Motif sums `f(E_k^(j))` at the basis level.
    pub fn motif_sums(&self, f: &[f64]) -> Vec<f64> {
        let j = self.level;
        (0..self.num_scaling()).map(|k| self.tree.set(j, k).iter().map(|&r| f[r]).sum()).collect()
    }

    /// Structural filter evaluated directly in the edge domain:
    ///
    /// `f̂(e) = σ_k/2^j · f(E_k^(j)) ± Σ_ℓ ν^(ℓ)/2^ℓ · [f(E_{2k}^(ℓ−1)) − f(E_{2k+1}^(ℓ−1))]`
    ///
    /// with `+` when `e` is in the first child. Equivalent to
    /// [`structural_filter_values`](Self::structural_filter_values).
    pub fn structural_filter_edge_domain(&self, f: &[f64], response: &StructuralResponse) -> Vec<f64> {
        assert_eq!(f.len(), self.len());
        assert_eq!(response.values.len(), self.len());
        let m = self.len();
        // sums[l][k] = f(E_k^(l)) for l = 0..=j
        let mut sums: Vec<Vec<f64>> = Vec::with_capacity(self.level as usize + 1);
        sums.push(self.tree.leaves().iter().map(|&r| f[r]).collect());
        for l in 1..=self.level as usize {
            let prev = &sums[l - 1];
            let next = (0..prev.len() / 2).map(|k| prev[2 * k] + prev[2 * k + 1]).collect();
            sums.push(next);
        }
        let j = self.level;
        let mut out = vec![0.0; m];
        for (r, o) in out.iter_mut().enumerate() {
            let pos = self.tree.leaf_position(r);
            let k = pos >> j;
            let mut v = response.values[k] * sums[j as usize][k] / (1u64 << j) as f64;
            for l in 1..=j {
                let k = pos >> l;
                let child = (pos >> (l - 1)) & 1;
                let diff = sums[l as usize - 1][2 * k] - sums[l as usize - 1][2 * k + 1];
                let nu = response.values[self.wavelet_range(l).start + k];
                let term = nu * diff / (1u64 << l) as f64;
                v += if child == 0 { term } else { -term };
            }
            *o = v;
        }
        out
    }

    /// Structural filter: analyze, scale each coefficient, synthesize.
    pub fn structural_filter_values(&self, f: &[f64], response: &StructuralResponse) -> Vec<f64> {
        assert_eq!(response.values.len(), self.len());
        let mut x = self.analyze_values(f);
        for (c, s) in x.iter_mut().zip(&response.values) {
            *c *= s;
        }
        self.synthesize_values(&x)
    }

    pub fn structural_filter(&self, g: &GraphSlice, response: &StructuralResponse) -> Result<GraphSlice> {
        self.check(g)?;
        response.check(self)?;
        GraphSlice::new(g.space().clone(), self.structural_filter_values(g.weights(), response))
    }

    /// Coarse-grain pass: `f(E_k^(j)) / 2^j` on every `e ∈ E_k^(j)`.
    pub fn coarse_values(&self, f: &[f64]) -> Vec<f64> {
        let j = self.level;
        let sums = self.motif_sums(f);
        let denom = (1u64 << j) as f64;
        (0..self.len()).map(|r| sums[self.tree.set_of(j, r)] / denom).collect()
    }

    /// Detail pass (graph differentiation): `f(e) − f(E_k^(j)) / 2^j`.
    pub fn detail_values(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(self.coarse_values(f)).map(|(a, c)| a - c).collect()
    }

    /// Graph regularity `Σ_e (df/de)²`.
    pub fn regularity_values(&self, f: &[f64]) -> f64 {
        self.detail_values(f).iter().map(|d| d * d).sum()
    }

    pub fn graph_regularity(&self, g: &GraphSlice) -> Result<f64> {
        self.check(g)?;
        Ok(self.regularity_values(g.weights()))
    }

    /// Template graph: the synthesis of the all-ones coefficient vector.
    pub fn template_values(&self) -> Vec<f64> {
        self.synthesize_values(&vec![1.0; self.len()])
    }

    pub fn template_graph(&self, like: &GraphSlice) -> Result<GraphSlice> {
        self.check(like)?;
        GraphSlice::new(like.space().clone(), self.template_values())
    }

    /// Per-coefficient squared differences `[(x1)_i − (x2)_i]²` of two unweighted graphs;
    /// they sum to `edit(g1, g2)`.
    pub fn edit_distance_spectrum(&self, g1: &GraphSlice, g2: &GraphSlice) -> Result<Vec<f64>> {
        if !g1.same_space(g2) {
            return Err(Error::SpaceMismatch);
        }
        if !g1.is_unweighted() || !g2.is_unweighted() {
            return Err(Error::Weighted);
        }
        let x1 = self.analyze(g1)?;
        let x2 = self.analyze(g2)?;
        Ok(x1.values.iter().zip(&x2.values).map(|(a, b)| (a - b) * (a - b)).collect())
    }

    /// Full embedding `x = [s, w]`.
    pub fn embed(&self, g: &GraphSlice) -> Result<Vec<f64>> {
        Ok(self.analyze(g)?.values)
    }

    /// Coarse embedding: the scaling coefficients `s`.
    pub fn embed_coarse(&self, g: &GraphSlice) -> Result<Vec<f64>> {
        let mut x = self.analyze(g)?.values;
        x.truncate(self.num_scaling());
        Ok(x)
    }
}

/// Coefficients `x = [s, w]` of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCoefficients {
    level: u32,
    values: Vec<f64>,
}

impl GraphCoefficients {
    pub fn new(level: u32, values: Vec<f64>) -> Self {
        Self { level, values }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaling(&self) -> &[f64] {
        &self.values[..self.values.len() >> self.level]
    }

    pub fn wavelets(&self) -> &[f64] {
        &self.values[self.values.len() >> self.level..]
    }
}

/// Diagonal structural response `Λ_Q = diag(σ…, ν…)` in coefficient layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralResponse {
    values: Vec<f64>,
}

impl StructuralResponse {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn from_parts(scaling: &[f64], wavelet: &[f64]) -> Self {
        let mut values = scaling.to_vec();
        values.extend_from_slice(wavelet);
        Self { values }
    }

    pub fn constant(basis: &GraphBasis, sigma: f64, nu: f64) -> Self {
        let ns = basis.num_scaling();
        Self { values: (0..basis.len()).map(|i| if i < ns { sigma } else { nu }).collect() }
    }

    pub fn identity(basis: &GraphBasis) -> Self {
        Self::constant(basis, 1.0, 1.0)
    }

    /// `σ = 1`, `ν = 0`.
    pub fn coarse_pass(basis: &GraphBasis) -> Self {
        Self::constant(basis, 1.0, 0.0)
    }

    /// `σ = 0`, `ν = 1`.
    pub fn detail_pass(basis: &GraphBasis) -> Self {
        Self::constant(basis, 0.0, 1.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn product(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    pub(crate) fn check(&self, basis: &GraphBasis) -> Result<()> {
        if self.values.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                what: "structural response",
                expected: basis.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// `Σ_k (m_k − m_k² / 2^j)`: regularity of an unweighted graph with motif profile `m`.
pub fn regularity_closed_form(profile: &[usize], level: u32) -> f64 {
    let size = (1u64 << level) as f64;
    profile.iter().map(|&m| m as f64 - (m * m) as f64 / size).sum()
}

/// `Σ_k m1_k · m2_k / 2^j`.
pub fn scaling_inner_closed_form(profile1: &[usize], profile2: &[usize], level: u32) -> f64 {
    let size = (1u64 << level) as f64;
    profile1.iter().zip(profile2).map(|(&a, &b)| (a * b) as f64 / size).sum()
}
