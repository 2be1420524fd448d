//! BFS halving for activity on a fixed infrastructure.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use rand::Rng;

use super::PartitionTree;
use crate::error::{Error, Result};
use crate::stream::RelationSpace;
use crate::synth::rng::stream_rng;
use crate::{is_power_of_two, log2_exact};

/// How the BFS start vertex of each set is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfsStart {
    /// Uniform among vertices with an out-edge in the set, from a stream of
    /// `seed` keyed by the set's `(level, k)`.
    Seeded(u64),
    /// Lowest-index vertex with an out-edge in the set.
    Lowest,
}

/// Partition the active relations of `active` by recursive BFS halving.
///
/// For each set, BFS runs on the directed graph formed by the set's edges.
/// A visited vertex contributes its self-loop first, then its out-edges by
/// ascending target. The first `|E|/2` explored edges form the first child;
/// if the reachable fragment runs out, BFS restarts from the lowest-index
/// vertex that still has unexplored out-edges.
pub fn partition_bfs(active: &RelationSpace, start: BfsStart) -> Result<PartitionTree> {
    if active.num_inert() > 0 {
        return Err(Error::NotPowerOfTwo {
            what: "active relation count",
            value: active.len() - active.num_inert(),
        });
    }
    let m = active.len();
    debug_assert!(is_power_of_two(m));
    let pairs: Vec<(u32, u32)> = active
        .relations()
        .iter()
        .map(|r| r.pair().expect("non-inert relations are pairs"))
        .collect();
    let all: Vec<usize> = (0..m).collect();
    let mut leaves = Vec::with_capacity(m);
    halve(&pairs, &all, log2_exact(m), 0, start, &mut leaves)?;
    PartitionTree::from_leaves(leaves)
}

fn halve(
    pairs: &[(u32, u32)],
    rels: &[usize],
    level: u32,
    k: usize,
    start: BfsStart,
    out: &mut Vec<usize>,
) -> Result<()> {
    if rels.len() == 1 {
        out.push(rels[0]);
        return Ok(());
    }
    let explored = bfs_half(pairs, rels, start, ((level as u64) << 32) | k as u64)?;
    let mut taken = BTreeMap::new();
    for &r in &explored {
        taken.insert(r, ());
    }
    let rest: Vec<usize> = rels.iter().copied().filter(|r| !taken.contains_key(r)).collect();
    halve(pairs, &explored, level - 1, 2 * k, start, out)?;
    halve(pairs, &rest, level - 1, 2 * k + 1, start, out)
}

/// The first `|rels| / 2` edges explored by BFS, in exploration order.
fn bfs_half(pairs: &[(u32, u32)], rels: &[usize], start: BfsStart, stream: u64) -> Result<Vec<usize>> {
    let need = rels.len() / 2;
    // vertex → [(target, relation)], self-loop first then ascending target
    let mut out_edges: BTreeMap<u32, Vec<(u32, usize)>> = BTreeMap::new();
    for &r in rels {
        let (u, v) = pairs[r];
        out_edges.entry(u).or_default().push((v, r));
    }
    for (&u, edges) in out_edges.iter_mut() {
        edges.sort_by_key(|&(v, _)| (v != u, v));
    }
    let sources: Vec<u32> = out_edges.keys().copied().collect();
    let mut visited: BTreeMap<u32, ()> = BTreeMap::new();
    let mut explored = Vec::with_capacity(need);
    let mut next_start = match start {
        BfsStart::Seeded(seed) => {
            let mut rng = stream_rng(seed, stream);
            sources[rng.gen_range(0..sources.len())]
        }
        BfsStart::Lowest => sources[0],
    };
    let mut queue = VecDeque::new();
    loop {
        visited.insert(next_start, ());
        queue.push_back(next_start);
        while let Some(u) = queue.pop_front() {
            for &(v, r) in out_edges.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                explored.push(r);
                if explored.len() == need {
                    return Ok(explored);
                }
                if visited.insert(v, ()).is_none() {
                    queue.push_back(v);
                }
            }
        }
        // fragment exhausted: every visited vertex has had all its out-edges explored
        next_start = match sources.iter().find(|s| !visited.contains_key(s)) {
            Some(&s) => s,
            None => return Err(Error::BfsExhausted { needed: need }),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn labels(n: usize) -> Vec<alloc::string::String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn path_graph_first_split_is_near_half() {
        let pairs: Vec<(u32, u32)> = (0..8).map(|i| (i, i + 1)).collect();
        let space = RelationSpace::from_pairs(labels(9), &pairs).unwrap();
        let tree = partition_bfs(&space, BfsStart::Lowest).unwrap();
        let mut first = tree.set(2, 0).to_vec();
        first.sort_unstable();
        assert_eq!(first, vec![0, 1, 2, 3]);
        assert_eq!(tree.leaves(), &[0, 1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn single_pair_keeps_exploration_order() {
        let space = RelationSpace::from_pairs(labels(2), &[(1, 0), (0, 1)]).unwrap();
        let tree = partition_bfs(&space, BfsStart::Lowest).unwrap();
        // BFS from vertex 0 explores (0,1) first, which is column 1
        assert_eq!(tree.leaves(), &[1, 0]);
    }

    #[test]
    fn star_explores_first_spokes() {
        // center 0 with spokes to 8..=1 listed in descending order
        let pairs: Vec<(u32, u32)> = (1..=8).rev().map(|s| (0, s)).collect();
        let space = RelationSpace::from_pairs(labels(9), &pairs).unwrap();
        for start in [BfsStart::Lowest, BfsStart::Seeded(11)] {
            let tree = partition_bfs(&space, start).unwrap();
            let targets: Vec<u32> = tree.set(2, 0).iter().map(|&r| pairs[r].1).collect();
            assert_eq!(targets, vec![1, 2, 3, 4]);
        }
    }

    #[test]
    fn self_loop_explored_first() {
        let space = RelationSpace::from_pairs(labels(3), &[(0, 2), (0, 1), (0, 0), (1, 2)]).unwrap();
        let tree = partition_bfs(&space, BfsStart::Lowest).unwrap();
        assert_eq!(tree.set(1, 0), &[2, 1]);
    }

    #[test]
    fn restarts_when_fragment_exhausts() {
        // 0→1 is a dead end; remaining edges live on 2→3→4
        let space = RelationSpace::from_pairs(labels(5), &[(0, 1), (2, 3), (3, 4), (4, 2)]).unwrap();
        let tree = partition_bfs(&space, BfsStart::Lowest).unwrap();
        assert_eq!(tree.set(1, 0), &[0, 1]);
    }

    #[test]
    fn seeded_is_deterministic() {
        let pairs: Vec<(u32, u32)> = (0..16u32).map(|i| (i % 5, (i * 7 + 1) % 6)).collect();
        let mut uniq = pairs.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let pairs: Vec<(u32, u32)> = uniq.into_iter().take(8).collect();
        let space = RelationSpace::from_pairs(labels(6), &pairs).unwrap();
        let a = partition_bfs(&space, BfsStart::Seeded(5)).unwrap();
        let b = partition_bfs(&space, BfsStart::Seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_padded_space() {
        let space = RelationSpace::from_pairs(labels(3), &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(partition_bfs(&space, BfsStart::Lowest).is_err());
    }
}
