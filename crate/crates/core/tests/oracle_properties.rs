use entropic_map::{
    golden_section_map, grid_map_search, local_optimality_check, ml_estimate, CountVector, GridSpec,
};
use proptest::prelude::*;

fn counts_strategy(k: usize) -> impl Strategy<Value = CountVector> {
    prop::collection::vec(0u32..=30, k)
        .prop_filter("at least one positive count", |c| c.iter().any(|&x| x > 0))
        .prop_map(|c| CountVector::new(c.into_iter().map(f64::from).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn zero_strength_grid_is_near_ml(
        counts in (2usize..=4).prop_flat_map(counts_strategy),
    ) {
        let k = counts.len();
        let resolution = if k == 2 { 1e-3 } else { 0.02 };
        let spec = GridSpec::new(resolution, k).unwrap();
        let r = grid_map_search(&counts, 0.0, &spec).unwrap();
        let ml = ml_estimate(&counts).unwrap();
        prop_assert!(r.theta.linf_distance(&ml) <= resolution + 1e-12, "{:?} vs {:?}", r.theta, ml);
    }

    #[test]
    fn grid_argmax_is_locally_optimal(
        counts in (2usize..=3).prop_flat_map(counts_strategy),
        a in 0.0f64..10.0,
    ) {
        let k = counts.len();
        let resolution = if k == 2 { 1e-3 } else { 0.02 };
        let r = grid_map_search(&counts, a, &GridSpec::new(resolution, k).unwrap()).unwrap();
        prop_assert!(local_optimality_check(&r.theta, &counts, a, 2.0 * resolution));
    }

    #[test]
    fn refining_the_grid_never_loses(
        counts in (2usize..=3).prop_flat_map(counts_strategy),
        a in 0.0f64..10.0,
    ) {
        let k = counts.len();
        let coarse_res = if k == 2 { 0.01 } else { 0.04 };
        let coarse = grid_map_search(&counts, a, &GridSpec::new(coarse_res, k).unwrap()).unwrap();
        let fine = grid_map_search(&counts, a, &GridSpec::new(coarse_res / 2.0, k).unwrap()).unwrap();
        prop_assert!(fine.value >= coarse.value);
    }

    #[test]
    fn grid_agrees_with_golden_section(counts in counts_strategy(2), a in 0.0f64..10.0) {
        let resolution = 1e-4;
        let grid = grid_map_search(&counts, a, &GridSpec::new(resolution, 2).unwrap()).unwrap();
        let (x, value) = golden_section_map(&counts, a, 1e-12).unwrap();
        // symmetric problems may have mirrored maxima of equal value
        let mirrored = counts[0] == counts[1];
        let close = (grid.theta[0] - x).abs() <= resolution
            || (mirrored && (grid.theta[0] - (1.0 - x)).abs() <= resolution);
        prop_assert!(close, "grid {} vs golden {}", grid.theta[0], x);
        prop_assert!(value >= grid.value - 1e-12);
    }
}
