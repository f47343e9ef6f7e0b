//! Randomized property tests over generated instances and rationals.

use proptest::prelude::*;
use sum_radii::envelope::{lower_envelope, AffineFn};
use sum_radii::oracle::{brute_force_opt, brute_force_opt_reversed, random_instance};
use sum_radii::pipeline::{solve, Mode, SolveConfig};
use sum_radii::rat::{rat_int, sqrt_ceil_to_grid, Rat};
use sum_radii::rounding::validate_solution;

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Rationalized Euclidean instances are genuine metrics: the rounded-up
    /// square root preserves symmetry, nonnegativity and the triangle
    /// inequality.
    #[test]
    fn generated_instances_are_metric(seed in 0_u64..10_000, n in 2_usize..8) {
        let instance = random_instance(n, 2, 1, 0, None, seed).unwrap();
        prop_assert!(instance.verify_metric().is_empty());
    }

    /// The exhaustive optimum does not depend on the enumeration order.
    #[test]
    fn oracle_is_enumeration_order_invariant(seed in 0_u64..10_000) {
        let instance = random_instance(6, 2, 2, 1, None, seed).unwrap();
        let forward = brute_force_opt(&instance, None).unwrap().unwrap();
        let reversed = brute_force_opt_reversed(&instance, None).unwrap().unwrap();
        prop_assert_eq!(forward.cost, reversed.cost);
    }

    /// Every plain-mode solution is feasible and at least the optimum.
    #[test]
    fn plain_solutions_are_feasible_and_above_opt(seed in 0_u64..10_000, n in 4_usize..8) {
        let instance = random_instance(n, 2, 2, 0, None, seed).unwrap();
        let report = solve(&instance, &SolveConfig::new(Mode::Plain)).unwrap();
        prop_assert!(validate_solution(&instance, &report.solution, 2, 0).is_empty());
        let opt = brute_force_opt(&instance, None).unwrap().unwrap();
        prop_assert!(report.solution.cost >= opt.cost);
    }

    /// The grid square root is an upper bound whose square is within one grid
    /// step of the input.
    #[test]
    fn grid_sqrt_is_a_tight_upper_bound(numer in 0_i64..1_000_000, denom in 1_i64..1_000) {
        let value = Rat::new(numer.into(), denom.into());
        let root = sqrt_ceil_to_grid(&value, 32);
        prop_assert!(&root * &root >= value);
        if root > Rat::new(1.into(), (1_i64 << 32).into()) {
            let below = &root - Rat::new(1.into(), (1_i64 << 32).into());
            prop_assert!(&below * &below < value);
        }
    }

    /// The lower envelope of a line family evaluates to the pointwise minimum.
    #[test]
    fn lower_envelope_is_the_pointwise_minimum(
        lines in prop::collection::vec((-20_i64..20, -50_i64..50), 1..6),
        sample in 0_i64..100,
    ) {
        let family: Vec<AffineFn> = lines
            .iter()
            .map(|(slope, intercept)| AffineFn::new(rat_int(*slope), rat_int(*intercept)))
            .collect();
        let lo = rat_int(0);
        let hi = rat_int(100);
        let envelope = lower_envelope(&family, &lo, &hi);
        let x = rat_int(sample);
        let expected = family.iter().map(|f| f.eval(&x)).min().unwrap();
        prop_assert_eq!(envelope.eval(&x), expected);
    }
}
