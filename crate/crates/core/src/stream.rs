//! Relation spaces, link stream matrices and graph slices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::dense::RealMatrix;
use crate::error::{Error, Result};
use crate::is_power_of_two;

/// Prefix reserved for padding vertices and padding relations.
pub const PAD_PREFIX: char = '~';
/// Separator between origin and destination in relation labels.
pub const RELATION_SEPARATOR: &str = "->";

/// One column of the link stream matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// Directed pair `(src, dst)` of vertex indices.
    Pair { src: u32, dst: u32 },
    /// Inert filler appended so that `M` is a power of two.
    Pad(u32),
}

impl Relation {
    pub fn pair(self) -> Option<(u32, u32)> {
        match self {
            Relation::Pair { src, dst } => Some((src, dst)),
            Relation::Pad(_) => None,
        }
    }
}

/// The indexed set of relations forming the columns of a link stream.
///
/// A *full* space holds every directed pair of `V × V` (self-loops included)
/// in lexicographic order. When `|V|` is not a power of two the vertex set is
/// padded with placeholder vertices and every relation touching one of them
/// is inert. A *restricted* space holds an arbitrary subset of pairs and is
/// padded with [`Relation::Pad`] entries instead.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationSpace {
    vertex_labels: Vec<String>,
    active_vertices: usize,
    relations: Vec<Relation>,
    inert: Vec<bool>,
    full: bool,
    index: BTreeMap<(u32, u32), usize>,
}

impl RelationSpace {
    /// Full space over `n` vertices labelled `0..n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::full_labeled((0..n).map(|v| v.to_string()).collect())
    }

    /// Full space over the given vertex labels, padded to a power-of-two vertex count.
    pub fn full_labeled(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("no vertices".into()));
        }
        validate_labels(&labels)?;
        let active = labels.len();
        let n = active.next_power_of_two();
        let mut vertex_labels = labels;
        for i in active..n {
            vertex_labels.push(format!("{PAD_PREFIX}v{i}"));
        }
        let mut relations = Vec::with_capacity(n * n);
        let mut inert = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                relations.push(Relation::Pair { src: u as u32, dst: v as u32 });
                inert.push(u >= active || v >= active);
            }
        }
        Ok(Self {
            vertex_labels,
            active_vertices: active,
            relations,
            inert,
            full: true,
            index: BTreeMap::new(),
        })
    }

    /// Restricted space over a subset of directed pairs, padded with inert
    /// relations up to the next power of two.
    pub fn from_pairs(labels: Vec<String>, pairs: &[(u32, u32)]) -> Result<Self> {
        validate_labels(&labels)?;
        if pairs.is_empty() {
            return Err(Error::InvalidSpace("no relations".into()));
        }
        let n = labels.len();
        let mut index = BTreeMap::new();
        let mut relations = Vec::with_capacity(pairs.len().next_power_of_two());
        for (k, &(src, dst)) in pairs.iter().enumerate() {
            if src as usize >= n || dst as usize >= n {
                return Err(Error::InvalidSpace(format!("pair ({src}, {dst}) references unknown vertex")));
            }
            if index.insert((src, dst), k).is_some() {
                return Err(Error::InvalidSpace(format!("duplicate pair ({src}, {dst})")));
            }
            relations.push(Relation::Pair { src, dst });
        }
        let m = relations.len().next_power_of_two();
        let mut inert = alloc::vec![false; relations.len()];
        for i in relations.len()..m {
            relations.push(Relation::Pad(i as u32));
            inert.push(true);
        }
        Ok(Self { vertex_labels: labels, active_vertices: n, relations, inert, full: false, index })
    }

    /// Restricted space made of the edges of an infrastructure graph.
    ///
    /// The vertex labels of the graph's space are kept; non-inert relations
    /// with nonzero weight become the active set, in column order.
    pub fn active_subset(infrastructure: &GraphSlice) -> Result<Self> {
        let space = infrastructure.space();
        let pairs: Vec<(u32, u32)> = infrastructure
            .edge_set()
            .into_iter()
            .filter_map(|k| space.relation(k).pair())
            .collect();
        let labels = space.vertex_labels[..space.active_vertices].to_vec();
        Self::from_pairs(labels, &pairs)
    }

    /// Rebuild a space from relation labels (`"u->v"` or `"~padN"`).
    pub fn from_relation_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut vertices: Vec<String> = Vec::new();
        let mut lookup: BTreeMap<String, u32> = BTreeMap::new();
        let mut pairs = Vec::new();
        let mut pads = 0usize;
        for (k, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            if let Some(rest) = label.strip_prefix(PAD_PREFIX) {
                if rest.starts_with("pad") {
                    pads += 1;
                    continue;
                }
            }
            if pads > 0 {
                return Err(Error::InvalidSpace(format!("relation label {label:?} after padding at column {k}")));
            }
            let (u, v) = label
                .split_once(RELATION_SEPARATOR)
                .ok_or_else(|| Error::InvalidSpace(format!("malformed relation label {label:?}")))?;
            let mut id = |name: &str| -> u32 {
                if let Some(&i) = lookup.get(name) {
                    return i;
                }
                let i = vertices.len() as u32;
                vertices.push(name.to_string());
                lookup.insert(name.to_string(), i);
                i
            };
            let src = id(u);
            let dst = id(v);
            pairs.push((src, dst));
        }
        let n = vertices.len();
        let lexicographic = pairs.len() == n * n
            && pairs.iter().enumerate().all(|(k, &(u, v))| (u as usize, v as usize) == (k / n, k % n));
        if pads == 0 && lexicographic {
            let active: Vec<String> =
                vertices.iter().take_while(|l| !l.starts_with(PAD_PREFIX)).cloned().collect();
            if vertices[active.len()..].iter().all(|l| l.starts_with(PAD_PREFIX)) {
                let space = Self::full_labeled(active)?;
                if space.vertex_labels == vertices {
                    return Ok(space);
                }
            }
        }
        let space = Self::from_pairs(vertices, &pairs)?;
        if space.len() != labels.len() {
            return Err(Error::InvalidSpace(format!(
                "{} labels do not form a padded power-of-two space ({} columns expected)",
                labels.len(),
                space.len()
            )));
        }
        Ok(space)
    }

    /// Number of relations `M` (a power of two).
    #[inline]
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Vertex count including padding vertices.
    pub fn num_vertices(&self) -> usize {
        self.vertex_labels.len()
    }

    /// Vertex count excluding padding vertices.
    pub fn num_active_vertices(&self) -> usize {
        self.active_vertices
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, k: usize) -> Relation {
        self.relations[k]
    }

    #[inline]
    pub fn is_inert(&self, k: usize) -> bool {
        self.inert[k]
    }

    pub fn num_inert(&self) -> usize {
        self.inert.iter().filter(|&&b| b).count()
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.vertex_labels
    }

    pub fn vertex_label(&self, v: u32) -> &str {
        &self.vertex_labels[v as usize]
    }

    /// Column index of the directed pair `(u, v)`.
    pub fn index_of(&self, u: u32, v: u32) -> Option<usize> {
        if self.full {
            let n = self.vertex_labels.len();
            ((u as usize) < n && (v as usize) < n).then(|| u as usize * n + v as usize)
        } else {
            self.index.get(&(u, v)).copied()
        }
    }

    pub fn relation_label(&self, k: usize) -> String {
        match self.relations[k] {
            Relation::Pair { src, dst } => format!(
                "{}{}{}",
                self.vertex_labels[src as usize], RELATION_SEPARATOR, self.vertex_labels[dst as usize]
            ),
            Relation::Pad(i) => format!("{PAD_PREFIX}pad{i}"),
        }
    }

    pub fn relation_labels(&self) -> Vec<String> {
        (0..self.len()).map(|k| self.relation_label(k)).collect()
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    let mut seen = BTreeMap::new();
    for l in labels {
        if l.is_empty() || l.contains(RELATION_SEPARATOR) || l.starts_with(PAD_PREFIX) || l.contains(',') {
            return Err(Error::InvalidSpace(format!("invalid vertex label {l:?}")));
        }
        if seen.insert(l.as_str(), ()).is_some() {
            return Err(Error::InvalidSpace(format!("duplicate vertex label {l:?}")));
        }
    }
    Ok(())
}

fn same_space(a: &Arc<RelationSpace>, b: &Arc<RelationSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Graph at a single time: a weight function over the relation space.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSlice {
    space: Arc<RelationSpace>,
    weights: Vec<f64>,
}

impl GraphSlice {
    pub fn new(space: Arc<RelationSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::DimensionMismatch {
                what: "graph weight vector",
                expected: space.len(),
                found: weights.len(),
            });
        }
        Ok(Self { space, weights })
    }

    pub fn empty(space: Arc<RelationSpace>) -> Self {
        let m = space.len();
        Self { space, weights: alloc::vec![0.0; m] }
    }

    /// Unweighted graph whose edges are the given column indices.
    pub fn from_edges(space: Arc<RelationSpace>, edges: &[usize]) -> Result<Self> {
        let mut g = Self::empty(space);
        for &k in edges {
            if k >= g.weights.len() {
                return Err(Error::RelationOutOfRange { index: k, len: g.weights.len() });
            }
            if g.space.is_inert(k) {
                return Err(Error::InvalidParameter(format!("relation {k} is inert")));
            }
            g.weights[k] = 1.0;
        }
        Ok(g)
    }

    pub fn space(&self) -> &Arc<RelationSpace> {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Non-inert relations carrying a nonzero weight.
    pub fn edge_set(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|&(k, &w)| w != 0.0 && !self.space.is_inert(k))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_set().len()
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights
            .iter()
            .enumerate()
            .all(|(k, &w)| w == 0.0 || (w == 1.0 && !self.space.is_inert(k)))
    }

    pub fn same_space(&self, other: &GraphSlice) -> bool {
        same_space(&self.space, &other.space)
    }

    fn check_pair(&self, other: &GraphSlice) -> Result<()> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        if !self.is_unweighted() || !other.is_unweighted() {
            return Err(Error::Weighted);
        }
        Ok(())
    }
}

/// Number of edges of `g1` that are not in `g2`: `|E1| − |E1 ∩ E2|`.
pub fn graph_dist(g1: &GraphSlice, g2: &GraphSlice) -> Result<usize> {
    g1.check_pair(g2)?;
    Ok(g1.weights.iter().zip(&g2.weights).filter(|&(&a, &b)| a == 1.0 && b == 0.0).count())
}

/// Number of differing edges: `dist(g1, g2) + dist(g2, g1)`.
pub fn graph_edit(g1: &GraphSlice, g2: &GraphSlice) -> Result<usize> {
    Ok(graph_dist(g1, g2)? + graph_dist(g2, g1)?)
}

/// Dense `T × M` link stream over a contiguous integer time window.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStreamMatrix {
    t0: i64,
    space: Arc<RelationSpace>,
    values: RealMatrix,
    unweighted: bool,
}

impl LinkStreamMatrix {
    pub fn new(t0: i64, space: Arc<RelationSpace>, values: RealMatrix) -> Result<Self> {
        if values.cols() != space.len() {
            return Err(Error::DimensionMismatch {
                what: "link stream columns",
                expected: space.len(),
                found: values.cols(),
            });
        }
        if !is_power_of_two(space.len()) {
            return Err(Error::NotPowerOfTwo { what: "relation count", value: space.len() });
        }
        let unweighted = (0..values.rows()).all(|t| {
            values
                .row(t)
                .iter()
                .enumerate()
                .all(|(k, &w)| w == 0.0 || (w == 1.0 && !space.is_inert(k)))
        });
        Ok(Self { t0, space, values, unweighted })
    }

    pub fn zeros(t0: i64, len: usize, space: Arc<RelationSpace>) -> Self {
        let m = space.len();
        Self::new(t0, space, RealMatrix::zeros(len, m)).expect("zero stream is well formed")
    }

    /// Stack graph slices (all in one relation space) as consecutive rows.
    pub fn from_slices(t0: i64, slices: &[GraphSlice]) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InvalidParameter("no slices".into()))?;
        let space = first.space.clone();
        let mut data = Vec::with_capacity(slices.len() * space.len());
        for s in slices {
            if !same_space(&s.space, &space) {
                return Err(Error::SpaceMismatch);
            }
            data.extend_from_slice(&s.weights);
        }
        let values = RealMatrix::from_vec(slices.len(), space.len(), data)?;
        Self::new(t0, space, values)
    }

    pub fn with_values(&self, values: RealMatrix) -> Result<Self> {
        Self::new(self.t0, self.space.clone(), values)
    }

    pub fn t0(&self) -> i64 {
        self.t0
    }

    /// Number of time samples `T`.
    pub fn len_t(&self) -> usize {
        self.values.rows()
    }

    /// Number of relations `M`.
    pub fn len_m(&self) -> usize {
        self.values.cols()
    }

    pub fn times(&self) -> core::ops::Range<i64> {
        self.t0..self.t0 + self.len_t() as i64
    }

    pub fn space(&self) -> &Arc<RelationSpace> {
        &self.space
    }

    pub fn values(&self) -> &RealMatrix {
        &self.values
    }

    pub fn into_values(self) -> RealMatrix {
        self.values
    }

    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn same_space(&self, other: &LinkStreamMatrix) -> bool {
        same_space(&self.space, &other.space)
    }

    /// Graph `G_t` at absolute time `t`.
    pub fn slice_at(&self, t: i64) -> Result<GraphSlice> {
        let row = self.row_index(t)?;
        Ok(GraphSlice { space: self.space.clone(), weights: self.values.row(row).to_vec() })
    }

    /// Graph stored at row `row` (relative to the window start).
    pub fn slice_row(&self, row: usize) -> GraphSlice {
        GraphSlice { space: self.space.clone(), weights: self.values.row(row).to_vec() }
    }

    /// Time series `e_k(t)` of relation `k`.
    pub fn edge_series(&self, k: usize) -> Result<Vec<f64>> {
        if k >= self.len_m() {
            return Err(Error::RelationOutOfRange { index: k, len: self.len_m() });
        }
        Ok(self.values.column(k))
    }

    /// Sum of all slices: the aggregated graph of the whole window.
    pub fn aggregate_graph(&self) -> GraphSlice {
        let mut w = alloc::vec![0.0; self.len_m()];
        for t in 0..self.len_t() {
            for (acc, &v) in w.iter_mut().zip(self.values.row(t)) {
                *acc += v;
            }
        }
        GraphSlice { space: self.space.clone(), weights: w }
    }

    fn row_index(&self, t: i64) -> Result<usize> {
        let end = self.t0 + self.len_t() as i64;
        if t < self.t0 || t >= end {
            return Err(Error::TimeOutOfWindow { t, start: self.t0, end });
        }
        Ok((t - self.t0) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn space(n: usize) -> Arc<RelationSpace> {
        Arc::new(RelationSpace::full(n).unwrap())
    }

    #[test]
    fn full_space_is_lexicographic() {
        let s = RelationSpace::full(4).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.index_of(1, 2), Some(6));
        assert_eq!(s.relation(6), Relation::Pair { src: 1, dst: 2 });
        assert_eq!(s.num_inert(), 0);
        assert_eq!(s.relation_label(6), "1->2");
    }

    #[test]
    fn full_space_pads_vertices() {
        let s = RelationSpace::full(3).unwrap();
        assert_eq!(s.num_vertices(), 4);
        assert_eq!(s.num_active_vertices(), 3);
        assert_eq!(s.len(), 16);
        // every relation touching vertex 3 is inert
        assert_eq!(s.num_inert(), 7);
        assert!(s.is_inert(s.index_of(3, 0).unwrap()));
        assert!(!s.is_inert(s.index_of(2, 2).unwrap()));
    }

    #[test]
    fn restricted_space_pads_relations() {
        let labels = vec!["a".to_string(), "b".into(), "c".into()];
        let s = RelationSpace::from_pairs(labels, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.is_inert(3));
        assert_eq!(s.relation_label(3), "~pad3");
        assert_eq!(s.index_of(1, 2), Some(1));
        assert_eq!(s.index_of(0, 2), None);
    }

    #[test]
    fn labels_round_trip() {
        for s in [
            RelationSpace::full(4).unwrap(),
            RelationSpace::full(3).unwrap(),
            RelationSpace::from_pairs(vec!["x".into(), "y".into()], &[(0, 1), (1, 0), (1, 1)]).unwrap(),
        ] {
            let rebuilt = RelationSpace::from_relation_labels(&s.relation_labels()).unwrap();
            assert_eq!(rebuilt, s);
        }
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(RelationSpace::full_labeled(vec!["a->b".into()]).is_err());
        assert!(RelationSpace::full_labeled(vec!["~x".into()]).is_err());
        assert!(RelationSpace::full_labeled(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn dist_and_edit_examples() {
        let s = space(2);
        let (a, b, c, d) = (0, 1, 2, 3);
        let g1 = GraphSlice::from_edges(s.clone(), &[a, b, c]).unwrap();
        let g2 = GraphSlice::from_edges(s.clone(), &[b, c, d]).unwrap();
        let empty = GraphSlice::empty(s.clone());
        let ab = GraphSlice::from_edges(s.clone(), &[a, b]).unwrap();
        assert_eq!(graph_dist(&g1, &g1).unwrap(), 0);
        assert_eq!(graph_dist(&ab, &empty).unwrap(), 2);
        assert_eq!(graph_dist(&g1, &g2).unwrap(), 1);
        assert_eq!(graph_edit(&g1, &g1).unwrap(), 0);
        assert_eq!(graph_edit(&g1, &g2).unwrap(), 2);
        assert_eq!(graph_edit(&empty, &g2).unwrap(), 3);
    }

    #[test]
    fn dist_errors() {
        let g = GraphSlice::new(space(2), vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        let e = GraphSlice::empty(space(2));
        assert_eq!(graph_dist(&g, &e), Err(Error::Weighted));
        let other = GraphSlice::empty(space(4));
        assert_eq!(graph_dist(&e, &other), Err(Error::SpaceMismatch));
    }

    #[test]
    fn slice_and_series() {
        let s = space(2);
        let values = RealMatrix::from_fn(3, 4, |t, k| (t * 4 + k) as f64);
        let l = LinkStreamMatrix::new(10, s, values).unwrap();
        assert_eq!(l.slice_at(11).unwrap().weights(), &[4.0, 5.0, 6.0, 7.0]);
        assert_eq!(l.edge_series(2).unwrap(), vec![2.0, 6.0, 10.0]);
        assert!(matches!(l.slice_at(13), Err(Error::TimeOutOfWindow { .. })));
        assert!(matches!(l.slice_at(9), Err(Error::TimeOutOfWindow { .. })));
        assert!(l.edge_series(4).is_err());
        assert!(!l.is_unweighted());
    }

    #[test]
    fn zero_row_is_empty_slice() {
        let l = LinkStreamMatrix::zeros(0, 2, space(2));
        assert!(l.slice_at(1).unwrap().edge_set().is_empty());
        assert!(l.is_unweighted());
    }

    fn unweighted_graph(m_vertices: usize) -> impl Strategy<Value = Vec<bool>> {
        proptest::collection::vec(any::<bool>(), m_vertices * m_vertices)
    }

    fn to_graph(s: &Arc<RelationSpace>, bits: &[bool]) -> GraphSlice {
        GraphSlice::new(s.clone(), bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn edit_is_a_metric(a in unweighted_graph(4), b in unweighted_graph(4), c in unweighted_graph(4)) {
            let s = space(4);
            let (ga, gb, gc) = (to_graph(&s, &a), to_graph(&s, &b), to_graph(&s, &c));
            let ab = graph_edit(&ga, &gb).unwrap();
            prop_assert_eq!(ab, graph_edit(&gb, &ga).unwrap());
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(graph_edit(&ga, &gc).unwrap() <= ab + graph_edit(&gb, &gc).unwrap());
        }

        #[test]
        fn squared_norm_equals_edit(a in unweighted_graph(4), b in unweighted_graph(4)) {
            let s = space(4);
            let (ga, gb) = (to_graph(&s, &a), to_graph(&s, &b));
            let sq: f64 = ga.weights().iter().zip(gb.weights()).map(|(x, y)| (x - y) * (x - y)).sum();
            prop_assert_eq!(sq, graph_edit(&ga, &gb).unwrap() as f64);
        }

        #[test]
        fn slices_reassemble_bit_exactly(data in proptest::collection::vec(-1e6f64..1e6, 5 * 16)) {
            let values = RealMatrix::from_vec(5, 16, data).unwrap();
            let l = LinkStreamMatrix::new(-2, space(4), values).unwrap();
            let slices: Vec<_> = l.times().map(|t| l.slice_at(t).unwrap()).collect();
            let back = LinkStreamMatrix::from_slices(-2, &slices).unwrap();
            prop_assert_eq!(back, l);
        }
    }
}
