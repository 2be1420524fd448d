use std::sync::Arc;

use linkspectra_core::partition::{partition_bfs, partition_svd, BfsStart, SvdOptions};
use linkspectra_core::spectra::{self, Boundary, Selection};
use linkspectra_core::synth::rng::stream_rng;
use linkspectra_core::synth::{self, DayNight, StructuralClass};
use linkspectra_core::{
    FourierBasis, FrequencyFilter, GraphBasis, GraphSlice, JointFilter, LinkStreamMatrix, PartitionTree, RealMatrix,
    RelationSpace, StreamBases, StructuralResponse,
};
use proptest::prelude::*;
use rand::Rng;

fn random_stream(seed: u64, t: usize, n: usize) -> LinkStreamMatrix {
    let space = Arc::new(RelationSpace::full(n).unwrap());
    let mut rng = stream_rng(seed, 0);
    let m = space.len();
    let values = RealMatrix::from_fn(t, m, |_, _| if rng.gen_bool(0.4) { rng.gen_range(-3.0..3.0) } else { 0.0 });
    LinkStreamMatrix::new(0, space, values).unwrap()
}

#[test]
fn svd_pipeline_round_trips_non_power_of_two_windows() {
    for (seed, t) in [(1, 12), (2, 50), (3, 64)] {
        let l = random_stream(seed, t, 8);
        let bases = StreamBases::from_aggregate(&l, Some(4), &SvdOptions::seeded(seed)).unwrap();
        let c = spectra::decompose(l.values(), &bases).unwrap();
        let back = spectra::reconstruct(&c, &bases).unwrap();
        assert!(back.max_abs_diff(l.values()) < 1e-10, "T={t}");
        let other = spectra::decompose_time_first(l.values(), &bases).unwrap();
        assert!(c.values().max_abs_diff(other.values()) < 1e-10);
    }
}

#[test]
fn bfs_basis_on_active_relations_is_orthonormal() {
    let l = random_stream(4, 16, 4);
    let mut activity = vec![0.0; 16];
    for k in [0, 1, 2, 5, 6, 9, 12, 15] {
        activity[k] = 1.0;
    }
    let infra = GraphSlice::new(l.space().clone(), activity).unwrap();
    let active = RelationSpace::active_subset(&infra).unwrap();
    let tree = partition_bfs(&active, BfsStart::Seeded(3)).unwrap();
    let phi = GraphBasis::coarsest(Arc::new(tree)).materialize();
    let gram = phi.matmul(&phi.transpose()).unwrap();
    assert!(gram.max_abs_diff(&RealMatrix::identity(8)) < 1e-12);
}

#[test]
fn composed_filters_equal_successive_application() {
    let l = random_stream(5, 32, 4);
    let (_, tree) = partition_svd(&l.aggregate_graph(), &SvdOptions::seeded(5)).unwrap();
    let graph = GraphBasis::new(Arc::new(tree), 3).unwrap();
    let bases = StreamBases::new(graph.clone(), FourierBasis::new(32).unwrap());
    let a = JointFilter::new(FrequencyFilter::lowpass(32, 0.2), StructuralResponse::coarse_pass(&graph));
    let b = JointFilter::new(FrequencyFilter::aggregation(32, 3).unwrap(), StructuralResponse::constant(&graph, 1.0, 0.5));
    let twice = b.apply(&a.apply(l.values(), &bases).unwrap(), &bases).unwrap();
    let once = a.compose(&b).apply(l.values(), &bases).unwrap();
    assert!(twice.max_abs_diff(&once) < 1e-10);
    let seq = a.apply_sequential(l.values(), &bases).unwrap();
    assert!(seq.max_abs_diff(&a.apply(l.values(), &bases).unwrap()) < 1e-10);
}

#[test]
fn backbone_of_everything_is_the_stream() {
    let l = random_stream(6, 20, 4);
    let bases = StreamBases::from_aggregate(&l, None, &SvdOptions::default()).unwrap();
    let bb = spectra::backbone(l.values(), &bases, &Selection::All).unwrap();
    assert!(bb.stream.max_abs_diff(l.values()) < 1e-10);
    assert!(bb.kept.iter().all(|&k| k));
}

#[test]
fn generators_are_seed_deterministic() {
    let p = DayNight { len: 40, ..DayNight::default() };
    assert_eq!(p.generate(9).unwrap(), p.generate(9).unwrap());
    assert_ne!(p.generate(9).unwrap(), p.generate(10).unwrap());
    let a = synth::gen_sbm_pair(2, 8, 0.5, 0.05, 1).unwrap();
    let b = synth::gen_sbm_pair(2, 8, 0.5, 0.05, 1).unwrap();
    assert_eq!((a.first, a.second), (b.first, b.second));
}

#[test]
fn structurally_equal_stream_has_zero_relaxed_time_regularity() {
    let space = Arc::new(RelationSpace::full(8).unwrap());
    let tree = Arc::new(PartitionTree::identity(64).unwrap());
    let class = StructuralClass::new(tree.clone(), 3, vec![3, 0, 8, 1, 4, 4, 2, 7]).unwrap();
    let slices: Vec<GraphSlice> =
        (0..32).map(|i| synth::sample_structurally_equal(&class, space.clone(), i).unwrap()).collect();
    let l = LinkStreamMatrix::from_slices(0, &slices).unwrap();
    let basis = GraphBasis::new(tree, 3).unwrap();
    for b in [Boundary::Circular, Boundary::Linear] {
        assert!(spectra::relaxed_time_regularity(l.values(), &basis, b).unwrap() < 1e-10);
    }
    let reg = spectra::regularity(l.values(), &basis, Boundary::Circular).unwrap();
    assert!(reg.time > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_is_unitary(seed in any::<u64>(), t in 1usize..40, level in 0u32..=4) {
        let l = random_stream(seed, t, 4);
        let tree = Arc::new(PartitionTree::identity(16).unwrap());
        let bases = StreamBases::new(GraphBasis::new(tree, level).unwrap(), FourierBasis::new(t).unwrap());
        let c = spectra::decompose(l.values(), &bases).unwrap();
        let (nc, nl) = (c.frobenius_norm(), l.values().frobenius_norm());
        prop_assert!((nc - nl).abs() <= 1e-10 * nl.max(1.0));
        let back = spectra::reconstruct(&c, &bases).unwrap();
        prop_assert!(back.max_abs_diff(l.values()) < 1e-10);
    }

    #[test]
    fn circular_regularity_splits_into_time_and_edge(seed in any::<u64>(), level in 1u32..=6) {
        let l = random_stream(seed, 8, 8);
        let tree = Arc::new(PartitionTree::identity(64).unwrap());
        let basis = GraphBasis::new(tree, level).unwrap();
        let reg = spectra::regularity(l.values(), &basis, Boundary::Circular).unwrap();
        prop_assert!((reg.total - reg.time - reg.edge).abs() < 1e-9);
        prop_assert!(reg.time >= 0.0 && reg.edge >= 0.0);
    }
}
