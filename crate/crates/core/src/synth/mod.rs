//! Seeded generators for the reference scenarios, structural classes, and
//! Monte-Carlo checks of the embedding and regularity identities.

mod lemmas;
pub mod rng;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::dense::RealMatrix;
use crate::error::{Error, Result};
use crate::partition::{PartitionTree, VertexSplit};
use crate::stream::{GraphSlice, LinkStreamMatrix, RelationSpace};
use rng::stream_rng;

pub use lemmas::{verify_lemma, LemmaCheck, LemmaConfig, LemmaSizes, McEstimate, Sequential, TrialRunner, MIN_TRIALS};

/// The full 4-vertex space of the claw/triangle fixture (relation `(u, v)` at `4u + v`).
pub fn oscillating_space() -> Arc<RelationSpace> {
    Arc::new(RelationSpace::full(4).expect("4 vertices"))
}

const CLAW: [usize; 8] = [1, 4, 2, 8, 3, 12, 0, 5];
const TRIANGLE: [usize; 8] = [6, 9, 7, 13, 11, 14, 10, 15];

/// Claw centred on vertex 0: both directions of its three spokes plus the
/// self-loops of vertices 0 and 1.
pub fn claw_motif() -> Vec<usize> {
    CLAW.to_vec()
}

/// Triangle on vertices 1, 2, 3: both directions of its three sides plus the
/// self-loops of vertices 2 and 3.
pub fn triangle_motif() -> Vec<usize> {
    TRIANGLE.to_vec()
}

/// Tree of the fixture: `E_0^(3)` is the claw and `E_1^(3)` the triangle;
/// below that, each motif is halved in the listed edge order.
pub fn claw_triangle_tree() -> PartitionTree {
    let mut leaves = CLAW.to_vec();
    leaves.extend_from_slice(&TRIANGLE);
    PartitionTree::from_leaves(leaves).expect("fixture tree is a permutation")
}

/// Stream alternating between the claw (even `t`) and the triangle (odd `t`).
pub fn gen_oscillating(len: usize) -> Result<LinkStreamMatrix> {
    if len == 0 {
        return Err(Error::InvalidParameter("stream length must be positive".into()));
    }
    let space = oscillating_space();
    let claw = GraphSlice::from_edges(space.clone(), &CLAW)?;
    let triangle = GraphSlice::from_edges(space, &TRIANGLE)?;
    let slices: Vec<GraphSlice> =
        (0..len).map(|t| if t % 2 == 0 { claw.clone() } else { triangle.clone() }).collect();
    LinkStreamMatrix::from_slices(0, &slices)
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

/// Two independent stochastic-block-model draws and the tree aligned with the blocks.
#[derive(Debug, Clone)]
pub struct SbmPair {
    pub first: GraphSlice,
    pub second: GraphSlice,
    /// Z-order tree of the block-major vertex numbering.
    pub tree: PartitionTree,
    /// Level whose sets are exactly the block pairs `A × B`.
    pub block_level: u32,
}

/// Vertices `b·n .. (b+1)·n` form block `b`. Every relation (self-loops
/// included) is drawn independently with `p_in` inside a block and `p_out`
/// across blocks. The first graph uses stream 0, the second stream 1.
pub fn gen_sbm_pair(blocks: usize, per_block: usize, p_in: f64, p_out: f64, seed: u64) -> Result<SbmPair> {
    check_probability("p_in", p_in)?;
    check_probability("p_out", p_out)?;
    if !crate::is_power_of_two(blocks) || !crate::is_power_of_two(per_block) {
        return Err(Error::InvalidParameter("block count and block size must be powers of two".into()));
    }
    let n = blocks * per_block;
    let space = Arc::new(RelationSpace::full(n)?);
    let draw = |stream: u64| -> Result<GraphSlice> {
        let mut rng = stream_rng(seed, stream);
        let w = (0..n * n)
            .map(|r| {
                let p = if r / n / per_block == r % n / per_block { p_in } else { p_out };
                if rng.gen_bool(p) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GraphSlice::new(space.clone(), w)
    };
    let tree = VertexSplit::identity(n)?.relation_tree()?;
    Ok(SbmPair {
        first: draw(0)?,
        second: draw(1)?,
        tree,
        block_level: 2 * crate::log2_exact(per_block),
    })
}

/// Parameters of the day/night community stream.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DayNight {
    pub communities: usize,
    pub per_community: usize,
    pub period: usize,
    /// Fraction of each period that is day.
    pub duty: f64,
    /// Probability that a within-community relation is active at a day sample.
    pub p_active: f64,
    pub len: usize,
}

impl Default for DayNight {
    fn default() -> Self {
        Self { communities: 2, per_community: 16, period: 20, duty: 0.5, p_active: 0.1, len: 200 }
    }
}

impl DayNight {
    fn validate(&self) -> Result<()> {
        check_probability("duty", self.duty)?;
        check_probability("p_active", self.p_active)?;
        if self.period == 0 || self.len == 0 || self.communities == 0 || self.per_community == 0 {
            return Err(Error::InvalidParameter("day/night sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.communities * self.per_community
    }

    pub fn is_day(&self, t: usize) -> bool {
        let day = libm::round(self.duty * self.period as f64) as usize;
        t % self.period < day
    }

    /// Community of vertex `v`, or `None` for padding vertices.
    pub fn community(&self, v: usize) -> Option<usize> {
        (v < self.num_vertices()).then(|| v / self.per_community)
    }

    /// `true` when relation `(u, v)` joins two members of one community.
    pub fn is_within(&self, u: usize, v: usize) -> bool {
        matches!((self.community(u), self.community(v)), (Some(a), Some(b)) if a == b)
    }

    fn build(&self, mut value: impl FnMut(usize, bool) -> f64) -> Result<LinkStreamMatrix> {
        self.validate()?;
        let space = Arc::new(RelationSpace::full(self.num_vertices())?);
        let n = space.num_vertices();
        let m = space.len();
        let mut values = RealMatrix::zeros(self.len, m);
        for t in 0..self.len {
            let day = self.is_day(t);
            for r in 0..m {
                if self.is_within(r / n, r % n) {
                    values.set(t, r, value(t, day));
                }
            }
        }
        LinkStreamMatrix::new(0, space, values)
    }

    /// Noisy stream: row `t` draws from stream `t`.
    pub fn generate(&self, seed: u64) -> Result<LinkStreamMatrix> {
        let mut current = usize::MAX;
        let mut rng = stream_rng(seed, 0);
        let p = self.p_active;
        self.build(|t, day| {
            if t != current {
                current = t;
                rng = stream_rng(seed, t as u64);
            }
            if day && rng.gen_bool(p) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Noiseless block-periodic template: 1 on within-community relations during the day.
    pub fn template(&self) -> Result<LinkStreamMatrix> {
        self.build(|_, day| if day { 1.0 } else { 0.0 })
    }
}

pub fn gen_daynight(params: &DayNight, seed: u64) -> Result<LinkStreamMatrix> {
    params.generate(seed)
}

/// `m_k = |E ∩ E_k^(j)|` for the nonzero entries of `weights`.
pub fn motif_profile(tree: &PartitionTree, level: u32, weights: &[f64]) -> Vec<usize> {
    (0..tree.num_sets(level)).map(|k| tree.set(level, k).iter().filter(|&&r| weights[r] != 0.0).count()).collect()
}

/// Graphs with a given edge count in every set `E_k^(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralClass {
    tree: Arc<PartitionTree>,
    level: u32,
    profile: Vec<usize>,
}

impl StructuralClass {
    pub fn new(tree: Arc<PartitionTree>, level: u32, profile: Vec<usize>) -> Result<Self> {
        if level > tree.depth() {
            return Err(Error::InvalidLevel { level, max: tree.depth() });
        }
        if profile.len() != tree.num_sets(level) {
            return Err(Error::DimensionMismatch {
                what: "motif profile",
                expected: tree.num_sets(level),
                found: profile.len(),
            });
        }
        let cap = 1usize << level;
        if let Some(&m) = profile.iter().find(|&&m| m > cap) {
            return Err(Error::InvalidParameter(format!("motif count {m} exceeds motif size {cap}")));
        }
        Ok(Self { tree, level, profile })
    }

    /// The class of an unweighted graph.
    pub fn of_graph(tree: Arc<PartitionTree>, level: u32, g: &GraphSlice) -> Result<Self> {
        if !g.is_unweighted() {
            return Err(Error::Weighted);
        }
        let profile = motif_profile(&tree, level, g.weights());
        Self::new(tree, level, profile)
    }

    pub fn tree(&self) -> &Arc<PartitionTree> {
        &self.tree
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn profile(&self) -> &[usize] {
        &self.profile
    }

    /// A uniform member as a 0/1 weight vector: in every motif, `m_k` relations
    /// chosen without replacement.
    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w = vec![0.0; self.tree.len()];
        let size = 1usize << self.level;
        for (k, &m) in self.profile.iter().enumerate() {
            let set = self.tree.set(self.level, k);
            for i in index::sample(rng, size, m) {
                w[set[i]] = 1.0;
            }
        }
        w
    }
}

/// Uniform draw from `class` over `space` (which must have no inert relations).
pub fn sample_structurally_equal(class: &StructuralClass, space: Arc<RelationSpace>, seed: u64) -> Result<GraphSlice> {
    if space.len() != class.tree.len() {
        return Err(Error::SpaceMismatch);
    }
    if space.num_inert() > 0 {
        return Err(Error::InvalidSpace("structural sampling needs a space without inert relations".into()));
    }
    let w = class.sample_weights(&mut stream_rng(seed, 0));
    GraphSlice::new(space, w)
}
