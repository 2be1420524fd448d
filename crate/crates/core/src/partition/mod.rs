//! Recursive dyadic partitions of the relation space.
//!
//! A [`PartitionTree`] is stored as its leaf order: relation `r` sits at leaf
//! position `leaf_order()[r]`, and the set `E_k^(j)` is the contiguous block of
//! leaves `[k·2^j, (k+1)·2^j)`. Every tree built here (from nested nodes, from
//! a vertex split, by BFS) is validated on construction.

mod bfs;
mod morton;
mod svd;

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::{is_power_of_two, log2_exact};

pub use bfs::{partition_bfs, BfsStart};
pub use morton::{morton_index, morton_index_interleaved};
pub use svd::{partition_svd, second_left_singular_vector, SvdOptions};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionTree {
    /// leaf position → relation index
    leaves: Vec<usize>,
    /// relation index → leaf position
    positions: Vec<usize>,
}

/// Nested binary form of a partition tree; leaves hold relation indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf(usize),
    Split(Box<TreeNode>, Box<TreeNode>),
}

impl TreeNode {
    pub fn split(a: TreeNode, b: TreeNode) -> Self {
        TreeNode::Split(Box::new(a), Box::new(b))
    }
}

impl PartitionTree {
    /// Tree whose leaf order is the identity.
    pub fn identity(m: usize) -> Result<Self> {
        Self::from_leaves((0..m).collect())
    }

    /// Build from `leaves[position] = relation`.
    pub fn from_leaves(leaves: Vec<usize>) -> Result<Self> {
        let m = leaves.len();
        if !is_power_of_two(m) {
            return Err(Error::NotPowerOfTwo { what: "partition size", value: m });
        }
        let mut positions = vec![usize::MAX; m];
        for (pos, &r) in leaves.iter().enumerate() {
            if r >= m {
                return Err(Error::InvalidTree(format!("relation {r} out of range for {m} leaves")));
            }
            if positions[r] != usize::MAX {
                return Err(Error::InvalidTree(format!("relation {r} appears twice")));
            }
            positions[r] = pos;
        }
        Ok(Self { leaves, positions })
    }

    /// Build from `leaf_order[relation] = position`.
    pub fn from_leaf_order(leaf_order: Vec<usize>) -> Result<Self> {
        let m = leaf_order.len();
        if !is_power_of_two(m) {
            return Err(Error::NotPowerOfTwo { what: "partition size", value: m });
        }
        let mut leaves = vec![usize::MAX; m];
        for (r, &pos) in leaf_order.iter().enumerate() {
            if pos >= m {
                return Err(Error::InvalidTree(format!("leaf position {pos} out of range for {m} leaves")));
            }
            if leaves[pos] != usize::MAX {
                return Err(Error::InvalidTree(format!("leaf position {pos} assigned twice")));
            }
            leaves[pos] = r;
        }
        Ok(Self { leaves, positions: leaf_order })
    }

    /// Build from a nested tree, checking that it is a perfect binary tree
    /// whose leaves are a permutation of `0..M`.
    pub fn from_nested(root: &TreeNode) -> Result<Self> {
        let mut leaves = Vec::new();
        let depth = collect_leaves(root, &mut leaves)?;
        if leaves.len() != 1 << depth {
            return Err(Error::InvalidTree("tree is not perfect".into()));
        }
        Self::from_leaves(leaves)
    }

    /// Nested form, rooted at `E_0^(log2 M)`.
    pub fn to_nested(&self) -> TreeNode {
        fn build(leaves: &[usize]) -> TreeNode {
            if leaves.len() == 1 {
                TreeNode::Leaf(leaves[0])
            } else {
                let (a, b) = leaves.split_at(leaves.len() / 2);
                TreeNode::split(build(a), build(b))
            }
        }
        build(&self.leaves)
    }

    /// Number of relations `M`.
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// `log2(M)`: the level of the root.
    pub fn depth(&self) -> u32 {
        log2_exact(self.leaves.len())
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// relation index → leaf position
    pub fn leaf_order(&self) -> &[usize] {
        &self.positions
    }

    pub fn leaf_position(&self, relation: usize) -> usize {
        self.positions[relation]
    }

    /// Number of sets at level `j`.
    pub fn num_sets(&self, level: u32) -> usize {
        self.len() >> level
    }

    /// Relations of `E_k^(j)`, in leaf order.
    pub fn set(&self, level: u32, k: usize) -> &[usize] {
        let size = 1usize << level;
        &self.leaves[k * size..(k + 1) * size]
    }

    /// Index `k` of the level-`j` set containing `relation`.
    pub fn set_of(&self, level: u32, relation: usize) -> usize {
        self.positions[relation] >> level
    }

    /// All levels as explicit set lists: `levels()[j][k] = E_k^(j)`.
    pub fn levels(&self) -> Vec<Vec<Vec<usize>>> {
        (0..=self.depth())
            .map(|j| (0..self.num_sets(j)).map(|k| self.set(j, k).to_vec()).collect())
            .collect()
    }
}

fn collect_leaves(node: &TreeNode, out: &mut Vec<usize>) -> Result<u32> {
    match node {
        TreeNode::Leaf(r) => {
            out.push(*r);
            Ok(0)
        }
        TreeNode::Split(a, b) => {
            let da = collect_leaves(a, out)?;
            let db = collect_leaves(b, out)?;
            if da != db {
                return Err(Error::InvalidTree(format!("unbalanced split: child depths {da} and {db}")));
            }
            Ok(da + 1)
        }
    }
}

/// Recursive bisection of the vertex set: `levels()[j]` holds the sets
/// `α_k^(j)` in tree order, each of size `2^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSplit {
    levels: Vec<Vec<Vec<u32>>>,
}

impl VertexSplit {
    /// Build from the leaf-ordered vertex sequence (the order of the `α^(0)`
    /// singletons). Every level is the dyadic grouping of that sequence.
    pub fn from_vertex_order(order: Vec<u32>) -> Result<Self> {
        let n = order.len();
        if !is_power_of_two(n) {
            return Err(Error::NotPowerOfTwo { what: "vertex count", value: n });
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v as usize >= n || core::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::InvalidTree(format!("vertex order is not a permutation of 0..{n}")));
            }
        }
        let levels = (0..=log2_exact(n))
            .map(|j| order.chunks(1 << j).map(|c| c.to_vec()).collect())
            .collect();
        Ok(Self { levels })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_vertex_order((0..n as u32).collect())
    }

    pub fn num_vertices(&self) -> usize {
        self.levels[0].len()
    }

    pub fn depth(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn levels(&self) -> &[Vec<Vec<u32>>] {
        &self.levels
    }

    /// Vertices in leaf order.
    pub fn vertex_order(&self) -> Vec<u32> {
        self.levels[0].iter().map(|s| s[0]).collect()
    }

    /// vertex → 0-based relabelled index.
    pub fn relabeling(&self) -> Vec<u32> {
        let mut r = vec![0u32; self.num_vertices()];
        for (i, v) in self.vertex_order().into_iter().enumerate() {
            r[v as usize] = i as u32;
        }
        r
    }

    /// Assemble the relation tree of a full `N × N` space by alternately
    /// splitting on origin (first, third, … splits from the root) and on
    /// destination (second, fourth, …), each ruled by the vertex sets.
    ///
    /// Relation `(u, v)` is expected at column `u·N + v`.
    pub fn relation_tree(&self) -> Result<PartitionTree> {
        let n = self.num_vertices();
        let depth = self.depth();
        // member[l][v] = index of the level-l set containing v
        let mut member = vec![vec![0usize; n]; depth as usize + 1];
        for (l, sets) in self.levels.iter().enumerate() {
            for (k, set) in sets.iter().enumerate() {
                for &v in set {
                    member[l][v as usize] = k;
                }
            }
        }
        let all: Vec<usize> = (0..n * n).collect();
        let mut leaves = Vec::with_capacity(n * n);
        split_interleaved(&all, n, depth, depth, true, &member, &mut leaves);
        PartitionTree::from_leaves(leaves)
    }
}

fn split_interleaved(
    rels: &[usize],
    n: usize,
    origin_level: u32,
    dest_level: u32,
    by_origin: bool,
    member: &[Vec<usize>],
    out: &mut Vec<usize>,
) {
    if rels.len() == 1 {
        out.push(rels[0]);
        return;
    }
    let (level, endpoint): (u32, fn(usize, usize) -> usize) = if by_origin {
        (origin_level, |r, n| r / n)
    } else {
        (dest_level, |r, n| r % n)
    };
    let child_level = (level - 1) as usize;
    let (first, second): (Vec<usize>, Vec<usize>) =
        rels.iter().partition(|&&r| member[child_level][endpoint(r, n)].is_multiple_of(2));
    debug_assert_eq!(first.len(), second.len());
    let (ol, dl) = if by_origin { (origin_level - 1, dest_level) } else { (origin_level, dest_level - 1) };
    split_interleaved(&first, n, ol, dl, !by_origin, member, out);
    split_interleaved(&second, n, ol, dl, !by_origin, member, out);
}
