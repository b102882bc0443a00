use fkpp::universal_constants::*;
use proptest::prelude::*;

#[test]
fn partial_sums_approach_from_below_the_tail_envelope() {
    let target = series_closed_form();
    let mut last = f64::INFINITY;
    for n in [1_000, 10_000, 100_000] {
        let (s, tail) = sum_lemma_series(n);
        let err = (s + tail - target).abs();
        assert!(err < 2.0 * tail, "n = {n}: {err:e} vs tail {tail:e}");
        assert!(tail < last);
        last = tail;
    }
}

#[test]
fn integral_identities() {
    let ln2 = 2f64.ln();
    assert!((arcsin_over_y_integral() - std::f64::consts::FRAC_PI_2 * ln2).abs() < 1e-10);
    assert!((log_cos_integral() + std::f64::consts::PI * ln2).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The ratio recurrence used for long sums reproduces direct evaluation.
    #[test]
    fn recurrence_agrees_with_direct_terms(n in 1usize..60) {
        let (s_next, _) = sum_lemma_series(n + 1);
        let (s, _) = sum_lemma_series(n);
        let direct = series_term(n);
        prop_assert!((s_next - s - direct).abs() <= 1e-12 * direct.abs() + 1e-15);
    }

    #[test]
    fn tail_scales_like_n_to_minus_three_halves(n in 1_000usize..1_000_000) {
        let r = series_tail(4 * n) / series_tail(n);
        prop_assert!((r - 0.125).abs() < 1e-3);
    }
}
