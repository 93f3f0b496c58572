//! Property-based invariants, 1000 cases each.

mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sphere_projection_has_unit_blocks(c in state_case(8)) {
        sphere_normalization(&c)?;
    }

    #[test]
    fn ball_projection_is_contained_and_nearest(
        (v, p) in (1usize..10).prop_flat_map(|d| (prop::collection::vec(-5.0f64..5.0, d), prop::collection::vec(-2.0f64..2.0, d)))
    ) {
        ball_containment(&v, &p)?;
    }

    #[test]
    fn cholesky_reconstructs(
        (d, entries, shift) in (1usize..12).prop_flat_map(|d| (Just(d), prop::collection::vec(-2.0f64..2.0, d * d), 1e-3f64..2.0))
    ) {
        cholesky_reconstruction(&entries, d, shift)?;
    }

    #[test]
    fn lambda_update_identity(c in state_case(8)) {
        lambda_identity(&c)?;
    }

    #[test]
    fn reflection_preserves_quadratic_form(c in state_case(8)) {
        reflection_preservation(&c)?;
    }

    #[test]
    fn penalty_never_decreases(c in penalty_case()) {
        tau_monotonicity(&c)?;
    }

    #[test]
    fn pencils_have_order_four_d_squared(d in 2usize..5, seed in any::<u64>()) {
        pencil_order(d, seed)?;
    }

    #[test]
    fn x_step_minimizes_the_augmented_lagrangian(c in state_case(6)) {
        x_step_is_minimizer(&c)?;
    }

    #[test]
    fn reduced_x_step_matches_full(c in state_case(10)) {
        x_step_equivalence(&c, 1e-8)?;
    }

    #[test]
    fn constraint_grows_along_rays(c in state_case(6), t in 0.0f64..5.0) {
        scaling_monotonicity(&c, t)?;
    }

    #[test]
    fn general_quadric_round_trip_up_to_scale(c in state_case(6), scale in 0.1f64..10.0) {
        general_quadric_round_trip(&c, scale)?;
    }
}
