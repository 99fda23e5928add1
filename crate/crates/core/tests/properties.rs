mod common;

use common::properties::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quantile_round_trip(e in -100.0..100.0f64, sigma in 0.01..50.0f64, alpha in 1e-9..(1.0 - 1e-9f64)) {
        round_trip(e, sigma, alpha)?;
    }

    #[test]
    fn quantile_odd_symmetry(alpha in 1e-12..(1.0 - 1e-12f64)) {
        odd_symmetry(alpha)?;
    }

    #[test]
    fn alpha_paths_increase_with_level(
        v0 in 0.1..1e5f64, mu in -0.2..0.2f64, sigma in 0.0..1.0f64,
        a1 in 1e-6..(1.0 - 1e-6f64), a2 in 1e-6..(1.0 - 1e-6f64),
    ) {
        paths_monotone(v0, mu, sigma, a1, a2)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn price_nondecreasing_in_firm_value(c in case(), bump in 1e-4..0.5f64) {
        monotone_in_v(c, bump)?;
    }

    #[test]
    fn price_increasing_in_volatility(c in case(), bump in 1e-3..0.04f64) {
        monotone_in_sigma(c, bump)?;
    }

    #[test]
    fn price_nondecreasing_in_ratio(c in case(), bump in 1e-4..0.5f64) {
        monotone_in_k(c, bump)?;
    }

    #[test]
    fn price_nonincreasing_in_payment(c in case(), bump in 1e-4..0.5f64) {
        monotone_in_j(c, bump)?;
    }

    #[test]
    fn rate_shift_only_discounts(c in case(), d in -0.5..0.5f64) {
        discount_scaling(c, d)?;
    }

    #[test]
    fn price_respects_lower_bounds(c in case()) {
        lower_bounds(c)?;
    }

    #[test]
    fn price_matches_incomplete_beta(c in case()) {
        matches_incomplete_beta(c)?;
    }

    #[test]
    fn firm_value_slope_matches_exact(c in case()) {
        derivative_matches_exact(c)?;
    }

    #[test]
    fn implied_stock_vol_matches_rebuilt_formula(c in case()) {
        implied_vol_independent(c)?;
    }

    #[test]
    fn elasticity_positive_under_dilution_condition(c in case()) {
        beta_positive(c)?;
    }

    #[test]
    fn pricing_is_idempotent(c in case()) {
        idempotent(c)?;
    }
}
