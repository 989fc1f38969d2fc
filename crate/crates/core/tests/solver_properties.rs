use entropic_map::{
    entropy_term, fit_map, grid_map_search, ml_estimate, update_alpha, update_theta, CountVector,
    FitResult, GridSpec, Init, NuSchedule, SolverConfig,
};
use proptest::prelude::*;

fn constant(a: f64, nu: f64) -> SolverConfig {
    SolverConfig {
        schedule: NuSchedule::Constant { nu },
        ..SolverConfig::with_a(a)
    }
}

fn counts_strategy() -> impl Strategy<Value = CountVector> {
    prop::collection::vec(0u32..=50, 2..=8)
        .prop_filter("at least one positive count", |c| c.iter().any(|&x| x > 0))
        .prop_map(|c| CountVector::new(c.into_iter().map(f64::from).collect()).unwrap())
}

fn assert_monotone_trace(fit: &FitResult) {
    let trace = fit.trace.as_ref().expect("trace requested");
    for r in trace {
        if let Some(before) = r.big_l_before {
            assert!(
                r.big_l_after_alpha >= before - 1e-10 * before.abs(),
                "alpha step decreased surrogate at iteration {}: {} -> {}",
                r.iteration,
                before,
                r.big_l_after_alpha
            );
        }
        assert!(
            r.big_l >= r.big_l_after_alpha - 1e-10 * r.big_l_after_alpha.abs(),
            "theta step decreased surrogate at iteration {}: {} -> {}",
            r.iteration,
            r.big_l_after_alpha,
            r.big_l
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_strength_is_ml(counts in counts_strategy()) {
        let fit = fit_map(&counts, &SolverConfig::with_a(0.0)).unwrap();
        prop_assert!(fit.converged);
        prop_assert_eq!(fit.theta, ml_estimate(&counts).unwrap());
    }

    #[test]
    fn surrogate_never_decreases(
        counts in counts_strategy(),
        a in 0.1f64..10.0,
        nu in prop::sample::select(vec![10.0, 1000.0]),
    ) {
        let config = SolverConfig { record_trace: true, ..constant(a, nu) };
        let fit = fit_map(&counts, &config).unwrap();
        assert_monotone_trace(&fit);
    }

    #[test]
    fn geometric_schedule_steps_are_ascent(counts in counts_strategy(), a in 0.1f64..10.0) {
        let config = SolverConfig { record_trace: true, ..SolverConfig::with_a(a) };
        let fit = fit_map(&counts, &config).unwrap();
        assert_monotone_trace(&fit);
    }

    #[test]
    fn converged_fits_are_fixed_points(counts in counts_strategy(), a in 0.0f64..10.0) {
        let config = SolverConfig::with_a(a);
        let fit = fit_map(&counts, &config).unwrap();
        prop_assert!(fit.converged);
        let floor = if a == 0.0 { 0.0 } else { config.floor };
        let alpha = update_alpha(&fit.theta, fit.final_nu, floor).unwrap();
        prop_assert!(alpha.linf_distance(&fit.alpha) < 1e-10);
        let theta = update_theta(&counts, &fit.alpha, a, fit.final_nu).unwrap();
        prop_assert!(theta.linf_distance(&fit.theta) < 10.0 * config.tol);
    }

    #[test]
    fn joint_scaling_leaves_theta_unchanged(
        counts in counts_strategy(),
        a in 0.0f64..10.0,
        m in prop::sample::select(vec![2.0, 10.0]),
    ) {
        let config = SolverConfig { init: Init::Uniform, ..SolverConfig::with_a(a) };
        let base = fit_map(&counts, &config).unwrap();
        let scaled_config = SolverConfig { a: m * a, ..config };
        let scaled = fit_map(&counts.scaled(m).unwrap(), &scaled_config).unwrap();
        prop_assert!(base.theta.linf_distance(&scaled.theta) < 1e-8);
    }

    #[test]
    fn fits_are_deterministic(counts in counts_strategy(), a in 0.0f64..10.0, seed in any::<u64>()) {
        let config = SolverConfig { jitter: 1e-4, seed, record_trace: true, ..SolverConfig::with_a(a) };
        prop_assert_eq!(fit_map(&counts, &config).unwrap(), fit_map(&counts, &config).unwrap());
    }
}

#[test]
fn sparsity_grows_with_strength() {
    let counts = CountVector::new(vec![6.0, 4.0]).unwrap();
    let mut last_max = 0.0;
    for a in [0.0, 1.0, 2.0, 5.0, 10.0] {
        let fit = fit_map(&counts, &constant(a, 1000.0)).unwrap();
        assert!(fit.converged);
        let (_, max) = fit.theta.max_entry();
        assert!(max >= last_max, "a = {a}: {max} < {last_max}");
        last_max = max;
    }
}

#[test]
fn larger_nu_tightens_alpha() {
    let counts = CountVector::new(vec![6.0, 4.0]).unwrap();
    let gaps: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&nu| {
            let fit = fit_map(&counts, &constant(5.0, nu)).unwrap();
            assert!(fit.converged);
            fit.alpha.linf_distance(&fit.theta)
        })
        .collect();
    assert!(gaps[1] <= gaps[0] && gaps[2] <= gaps[1], "{gaps:?}");
}

#[test]
fn matches_grid_oracle_on_two_categories() {
    // reference: exhaustive grid at resolution 1e-6
    let counts = CountVector::new(vec![6.0, 4.0]).unwrap();
    let oracle = grid_map_search(&counts, 5.0, &GridSpec::new(1e-6, 2).unwrap()).unwrap();
    let config = SolverConfig {
        tol: 1e-12,
        ..constant(5.0, 1000.0)
    };
    let fit = fit_map(&counts, &config).unwrap();
    assert!(fit.converged);
    assert!(fit.theta.linf_distance(&oracle.theta) < 1e-3);
    assert!((fit.log_joint_value - oracle.value).abs() < 1e-4);
}

#[test]
fn approximation_gap_shrinks_with_nu() {
    let counts = CountVector::new(vec![6.0, 4.0]).unwrap();
    let gap = |nu| {
        fit_map(&counts, &constant(5.0, nu))
            .unwrap()
            .approximation_gap()
    };
    assert!(gap(1000.0) < gap(10.0));
}

#[test]
fn sparse_counts_drive_zero_categories_down() {
    let counts = CountVector::new(vec![3.0, 0.0]).unwrap();
    let fit = fit_map(&counts, &constant(2.0, 1000.0)).unwrap();
    assert!(fit.converged);
    assert!(fit.theta[1] < 1e-6);
    assert!(entropy_term(&fit.theta) > -1e-5);
}
