mod common;

use common::mc_pi_ei;
use molbo::acquisition::{expected_improvement, prob_improvement, ucb};
use molbo::rng::stream_rng;
use proptest::prelude::*;

#[test]
fn pi_example_against_monte_carlo() {
    let mut rng = stream_rng(21, 0);
    let (pi, _) = mc_pi_ei(&mut rng, 0.1, 0.05, 0.4, 100_000);
    assert!((prob_improvement(0.1, 0.05, 0.4) - pi).abs() < 3e-3);
}

#[test]
fn ei_example_against_monte_carlo() {
    let mut rng = stream_rng(22, 0);
    let (_, ei) = mc_pi_ei(&mut rng, 0.3, 0.1, 0.6, 100_000);
    assert!((expected_improvement(0.3, 0.1, 0.6) - ei).abs() < 3e-3);
}

#[test]
fn ei_limits() {
    assert!((expected_improvement(0.3, 1.0, 0.3) - 0.398_942_280_401_432_7).abs() < 1e-15);
    for (m, y) in [(0.7, 0.5), (0.2, 0.5), (0.5, 0.5)] {
        let limit = f64::max(0.0, m - y);
        assert!((expected_improvement(m, 1e-12, y) - limit).abs() < 1e-9);
        assert_eq!(expected_improvement(m, 0.0, y), limit);
    }
}

#[test]
fn zero_std_is_finite() {
    for m in [-1.0, 0.0, 0.5, 2.0] {
        assert!(prob_improvement(m, 0.0, 0.5).is_finite());
        assert!(expected_improvement(m, 0.0, 0.5).is_finite());
        assert!(ucb(m, 0.0, 0.3).is_finite());
    }
}

proptest! {
    #[test]
    fn pi_ei_nondecreasing_in_mean(m in -3.0f64..3.0, d in 0.0f64..1.0, s in 0.0f64..2.0, y in -3.0f64..3.0) {
        prop_assert!(prob_improvement(m + d, s, y) >= prob_improvement(m, s, y));
        prop_assert!(expected_improvement(m + d, s, y) >= expected_improvement(m, s, y));
    }

    #[test]
    fn pi_ei_nondecreasing_in_std_below_incumbent(y in -3.0f64..3.0, gap in 0.0f64..2.0, s in 0.0f64..2.0, d in 0.0f64..1.0) {
        let m = y - gap;
        prop_assert!(prob_improvement(m, s + d, y) >= prob_improvement(m, s, y));
        prop_assert!(expected_improvement(m, s + d, y) >= expected_improvement(m, s, y));
    }

    #[test]
    fn ei_dominates_plain_gain(m in -3.0f64..3.0, s in 0.0f64..2.0, y in -3.0f64..3.0) {
        let ei = expected_improvement(m, s, y);
        prop_assert!(ei >= f64::max(0.0, m - y));
        prop_assert!(ei.is_finite());
        let pi = prob_improvement(m, s, y);
        prop_assert!((0.0..=1.0).contains(&pi));
    }

    #[test]
    fn ucb_monotone_in_beta(m in -3.0f64..3.0, s in 0.001f64..2.0, b in 0.0f64..3.0, d in 0.001f64..1.0) {
        prop_assert!(ucb(m, s, b) < ucb(m, s, b + d));
    }
}
