use proptest::prelude::*;
use stein_core::bounds::{zero_bias_bound, SmoothnessClass, Variant};
use stein_core::rng::substream;
use stein_core::score::{center_for_cycle_type, center_for_uniform, random_raw};
use stein_core::verify::{interval_distance, kolmogorov_distance};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_distance_dominates_kolmogorov(xs in prop::collection::vec(-4.0f64..4.0, 1..200)) {
        let k = kolmogorov_distance(&xs).unwrap().value;
        let i = interval_distance(&xs).unwrap().value;
        prop_assert!(i + 1e-12 >= k);
        prop_assert!(i <= 2.0 * k + 1e-12);
        prop_assert!(i <= 1.0);
    }

    #[test]
    fn distance_ignores_sample_order(mut xs in prop::collection::vec(-3.0f64..3.0, 2..100)) {
        let a = kolmogorov_distance(&xs).unwrap().value;
        xs.reverse();
        prop_assert_eq!(a, kolmogorov_distance(&xs).unwrap().value);
    }

    #[test]
    fn centering_is_idempotent(n in 4usize..9, seed in 0u64..1000) {
        let raw = random_raw(n, &mut substream(seed, 0));
        let u = center_for_uniform(&raw).unwrap();
        prop_assert!(u.row_centered());
        let again = center_for_uniform(&u.rows()).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((u.get(i, j) - again.get(i, j)).abs() <= 1e-12);
            }
        }
        let c = center_for_cycle_type(&raw).unwrap();
        prop_assert!(c.symmetric() && c.zero_diagonal() && c.globally_centered());
    }

    #[test]
    fn bounds_grow_with_the_coupling_constant(b in 1e-4f64..0.04, extra in 1e-4f64..0.001) {
        let h = SmoothnessClass::half_lines();
        let lo = zero_bias_bound(1.0, b, &h, Variant::HalfLine).unwrap().delta_bound;
        let hi = zero_bias_bound(1.0, b + extra, &h, Variant::HalfLine).unwrap().delta_bound;
        prop_assert!(hi > lo && lo > 0.0);
    }
}
