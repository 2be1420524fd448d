use std::path::Path;
use std::sync::Arc;

use linkspectra::formats::stream_file::{read_csv, read_raw, write_csv, write_raw};
use linkspectra_core::{LinkStreamMatrix, RealMatrix, RelationSpace};
use proptest::prelude::*;

fn stream(t0: i64, n: usize, values: Vec<f64>) -> LinkStreamMatrix {
    let space = Arc::new(RelationSpace::full(n).unwrap());
    let m = space.len();
    let t = values.len() / m;
    LinkStreamMatrix::new(t0, space, RealMatrix::from_fn(t, m, |i, k| values[i * m + k])).unwrap()
}

fn arb_stream() -> impl Strategy<Value = LinkStreamMatrix> {
    (-50i64..50, prop::sample::select(vec![2usize, 4]), 1usize..12).prop_flat_map(|(t0, n, t)| {
        let cell = prop_oneof![Just(0.0), Just(-0.0), any::<f64>().prop_filter("finite", |x| x.is_finite())];
        prop::collection::vec(cell, t * n * n).prop_map(move |v| stream(t0, n, v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_csv_is_lossless(s in arb_stream()) {
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), Path::new("mem")).unwrap();
        prop_assert_eq!(back.t0(), s.t0());
        prop_assert_eq!(back.values().max_abs_diff(s.values()), 0.0);
    }

    #[test]
    fn raw_is_lossless(s in arb_stream()) {
        let mut buf = Vec::new();
        write_raw(&s, &mut buf).unwrap();
        prop_assert_eq!(read_raw(buf.as_slice(), Path::new("mem")).unwrap(), s);
    }
}
