//! Recursive SVD bisection of the vertex set.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{PartitionTree, VertexSplit};
use crate::error::{Error, Result};
use crate::stream::GraphSlice;
use crate::synth::rng::stream_rng;
use crate::{is_power_of_two, log2_exact};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    pub seed: u64,
    /// Convergence threshold on successive unit iterates.
    pub tolerance: f64,
    /// Iteration cap; `None` means `max(10·N, 100)`.
    pub max_iterations: Option<usize>,
}

impl SvdOptions {
    pub fn seeded(seed: u64) -> Self {
        Self { seed, tolerance: 1e-10, max_iterations: None }
    }
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self::seeded(0)
    }
}

/// Partition a full relation space by recursive SVD bisection of the
/// adjacency matrix given by `adj` (typically the aggregate of a stream).
///
/// Each vertex set `α` is split by the second left singular vector of the
/// rows of `A` indexed by `α`: vertices with the top half of entries form the
/// first child. When the submatrix is zero or rank one the set is split by
/// ascending vertex index instead.
pub fn partition_svd(adj: &GraphSlice, options: &SvdOptions) -> Result<(VertexSplit, PartitionTree)> {
    let space = adj.space();
    if !space.is_full() {
        return Err(Error::InvalidSpace("SVD partitioning needs a full V × V relation space".into()));
    }
    let n = space.num_vertices();
    if !is_power_of_two(n) {
        return Err(Error::NotPowerOfTwo { what: "vertex count", value: n });
    }
    let max_iter = options.max_iterations.unwrap_or((10 * n).max(100));
    let adjacency = adj.weights();
    let mut order = Vec::with_capacity(n);
    let root: Vec<u32> = (0..n as u32).collect();
    bisect(adjacency, n, &root, log2_exact(n), 0, options, max_iter, &mut order);
    let split = VertexSplit::from_vertex_order(order)?;
    let tree = split.relation_tree()?;
    Ok((split, tree))
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    adjacency: &[f64],
    n: usize,
    set: &[u32],
    level: u32,
    k: usize,
    options: &SvdOptions,
    max_iter: usize,
    out: &mut Vec<u32>,
) {
    if set.len() == 1 {
        out.push(set[0]);
        return;
    }
    let rows: Vec<&[f64]> = set.iter().map(|&v| &adjacency[v as usize * n..(v as usize + 1) * n]).collect();
    let stream = ((level as u64) << 32) | k as u64;
    let mut ranked: Vec<(f64, u32)> =
        match second_left_singular_vector(&rows, options.seed, stream, options.tolerance, max_iter) {
            Some(vec2) => vec2.into_iter().zip(set.iter().copied()).collect(),
            None => set.iter().map(|&v| (0.0, v)).collect(),
        };
    // descending by entry, ties by ascending vertex
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let half = set.len() / 2;
    let mut first: Vec<u32> = ranked[..half].iter().map(|p| p.1).collect();
    let mut second: Vec<u32> = ranked[half..].iter().map(|p| p.1).collect();
    first.sort_unstable();
    second.sort_unstable();
    bisect(adjacency, n, &first, level - 1, 2 * k, options, max_iter, out);
    bisect(adjacency, n, &second, level - 1, 2 * k + 1, options, max_iter, out);
}

/// Second left singular vector of the matrix whose rows are `rows`, by power
/// iteration on `A Aᵀ` with deflation of the leading vector.
///
/// Returns `None` when the matrix is zero or numerically rank one. The sign is
/// fixed so that the largest-magnitude entry is positive.
pub fn second_left_singular_vector(
    rows: &[&[f64]],
    seed: u64,
    stream: u64,
    tolerance: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let s = rows.len();
    if s < 2 {
        return None;
    }
    let cols = rows[0].len();
    let gram_apply = |x: &[f64], y: &mut [f64]| {
        let mut b = vec![0.0; cols];
        for (row, &xi) in rows.iter().zip(x) {
            if xi != 0.0 {
                for (bj, &a) in b.iter_mut().zip(row.iter()) {
                    *bj += xi * a;
                }
            }
        }
        for (yi, row) in y.iter_mut().zip(rows) {
            *yi = row.iter().zip(&b).map(|(a, bj)| a * bj).sum();
        }
    };
    let mut rng = stream_rng(seed, stream);
    let start = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..s).map(|_| rng.gen::<f64>() - 0.5).collect()
    };

    let v1 = power_iterate(&gram_apply, start(&mut rng), None, 0.0, tolerance, max_iter)?;
    let mut gv = vec![0.0; s];
    gram_apply(&v1, &mut gv);
    let lambda1 = dot(&v1, &gv);
    if lambda1.is_nan() || lambda1 <= 0.0 {
        return None;
    }
    // a deflated iterate shorter than this is roundoff from the leading direction
    let floor = DEGENERATE_RATIO * lambda1;
    let v2 = power_iterate(&gram_apply, start(&mut rng), Some((&v1, lambda1)), floor, tolerance, max_iter)?;
    gram_apply(&v2, &mut gv);
    let lambda2 = dot(&v2, &gv);
    if lambda2 <= DEGENERATE_RATIO * lambda1 {
        return None;
    }
    Some(fix_sign(v2))
}

const DEGENERATE_RATIO: f64 = 1e-9;

/// Power iteration; `None` if an iterate's norm before normalization drops to `floor` or below.
fn power_iterate(
    apply: &dyn Fn(&[f64], &mut [f64]),
    mut x: Vec<f64>,
    deflate: Option<(&[f64], f64)>,
    floor: f64,
    tolerance: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let project = |x: &mut [f64]| {
        if let Some((v1, _)) = deflate {
            let c = dot(v1, x);
            for (xi, &vi) in x.iter_mut().zip(v1) {
                *xi -= c * vi;
            }
        }
    };
    project(&mut x);
    if !normalize(&mut x, 0.0) {
        return None;
    }
    let mut y = vec![0.0; x.len()];
    for _ in 0..max_iter {
        apply(&x, &mut y);
        if let Some((v1, lambda1)) = deflate {
            let c = dot(v1, &x);
            for (yi, &vi) in y.iter_mut().zip(v1) {
                *yi -= lambda1 * c * vi;
            }
        }
        project(&mut y);
        if !normalize(&mut y, floor) {
            return None;
        }
        let delta = libm::sqrt(x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
        core::mem::swap(&mut x, &mut y);
        if delta < tolerance {
            break;
        }
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64], floor: f64) -> bool {
    let norm = libm::sqrt(dot(x, x));
    if norm.is_nan() || norm <= floor.max(1e-300) {
        return false;
    }
    for v in x.iter_mut() {
        *v /= norm;
    }
    true
}

fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RelationSpace;
    use alloc::sync::Arc;

    #[test]
    fn block_matrix_second_vector_separates_blocks() {
        // two 2-vertex blocks of different strength
        let a: [&[f64]; 4] = [&[3.0, 3.0, 0.0, 0.0], &[3.0, 3.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 1.0]];
        let v = second_left_singular_vector(&a, 1, 0, 1e-12, 1000).unwrap();
        assert!(v[0].abs() < 1e-6 && v[1].abs() < 1e-6);
        assert!((v[2] - v[3]).abs() < 1e-9 && v[2] > 0.5);
    }

    #[test]
    fn rank_one_is_degenerate() {
        let a: [&[f64]; 2] = [&[1.0, 2.0], &[2.0, 4.0]];
        assert!(second_left_singular_vector(&a, 0, 0, 1e-10, 100).is_none());
        let z: [&[f64]; 2] = [&[0.0, 0.0], &[0.0, 0.0]];
        assert!(second_left_singular_vector(&z, 0, 0, 1e-10, 100).is_none());
    }

    #[test]
    fn clique_split_is_ascending_and_deterministic() {
        let space = Arc::new(RelationSpace::full(4).unwrap());
        let g = GraphSlice::new(space, vec![1.0; 16]).unwrap();
        let (split, tree) = partition_svd(&g, &SvdOptions::seeded(3)).unwrap();
        assert_eq!(split.vertex_order(), vec![0, 1, 2, 3]);
        let (_, again) = partition_svd(&g, &SvdOptions::seeded(3)).unwrap();
        assert_eq!(tree, again);
        let (_, other_seed) = partition_svd(&g, &SvdOptions::seeded(99)).unwrap();
        assert_eq!(tree, other_seed);
    }

    #[test]
    fn rejects_restricted_space() {
        let space = RelationSpace::from_pairs(vec!["a".into(), "b".into()], &[(0, 1), (1, 0)]).unwrap();
        let g = GraphSlice::empty(Arc::new(space));
        assert!(partition_svd(&g, &SvdOptions::default()).is_err());
    }

    #[test]
    fn two_blocks_split_at_root() {
        // 8 vertices: {0,2,4,6} and {1,3,5,7} fully connected within, plus a
        // weaker tie; the root split must separate the blocks.
        let n = 8;
        let space = Arc::new(RelationSpace::full(n).unwrap());
        let mut w = vec![0.0; n * n];
        for u in 0..n {
            for v in 0..n {
                if u % 2 == v % 2 {
                    w[u * n + v] = if u % 2 == 0 { 1.0 } else { 0.8 };
                }
            }
        }
        w[1] = 1.0;
        let g = GraphSlice::new(space, w).unwrap();
        let (split, _) = partition_svd(&g, &SvdOptions::seeded(7)).unwrap();
        let top = &split.levels()[2];
        let parity: Vec<u32> = top[0].iter().map(|v| v % 2).collect();
        assert!(parity.iter().all(|&p| p == parity[0]));
        assert!(top[1].iter().all(|v| v % 2 != parity[0]));
    }
}
