use std::f64::consts::PI;
use std::sync::OnceLock;

use fkpp::front_lab::*;
use fkpp::inner_expansion::{solve_inner, InnerTerm};
use fkpp::outer_expansion::{balance_alpha1, mu_star, OuterSolution};
use fkpp::spectral_halfline::SpectralBasis;
use fkpp::traveling_wave::standard_wave;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Fixture {
    inner: InnerTerm,
    outer: OuterCache,
    v3bar_slope: f64,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let basis = SpectralBasis::standard();
        let inner = solve_inner(&standard_wave()).unwrap();
        let probe = OuterSolution::build(&basis, mu_star(), 0.0, 0.0).unwrap();
        let v3bar_slope = probe.v3.bar_slope;
        let alpha1 = balance_alpha1(v3bar_slope, inner.c1_minus, 0.0);
        let outer = OuterCache::new(&basis, &OuterSolution::build(&basis, mu_star(), alpha1, 0.0).unwrap()).unwrap();
        Fixture { inner, outer, v3bar_slope }
    })
}

/// `sigma - 2t` of the full stage-6 model.
fn model(t: f64, a: f64, b: f64, mu: f64, big_b: f64) -> f64 {
    -1.5 * t.ln() + a + b / t.sqrt() + mu * t.ln() / t + big_b / t
}

fn times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

#[test]
fn noisy_round_trip_recovers_alphas() {
    let (a0, a1) = (-1.234, 2.5);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data: Vec<(f64, f64)> = times(100.0, 1e4, 600)
        .into_iter()
        .map(|t| (t, model(t, a0, -3.0 * PI.sqrt(), mu_star(), a1) + rng.gen_range(-1e-6..1e-6)))
        .collect();
    let opts = FitOptions { mu: MuMode::Frozen(mu_star()), ..Default::default() };
    let rep = fit_series(&data, 0.5, &opts).unwrap();
    assert!((rep.constant.unwrap() - a0).abs() < 5e-4);
    assert!((rep.inv_t.unwrap() - a1).abs() < 5e-4);
    // Stages are not nested (stage 2 frees the log coefficient that stage 3
    // fixes), so the RMS need not fall monotonically; stage 4 reaches the
    // noise floor and stage 5 stays there.
    let rms: Vec<f64> = rep.stages.iter().map(|s| s.rms).collect();
    assert!(rms[1] < rms[0] && rms[3] < 1e-3 * rms[2]);
    assert!(rms[3] < 1e-6 && rms[4] < 1.01 * rms[3], "{rms:?}");
    assert!((rep.speed.unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn low_threshold_reports_ill_conditioning() {
    let data: Vec<(f64, f64)> = times(1e3, 1e5, 200).into_iter().map(|t| (t, model(t, 0.1, -3.0 * PI.sqrt(), mu_star(), 0.5))).collect();
    let opts = FitOptions { t_min: 1e3, t_max: 1e5, condition_threshold: 10.0, ..Default::default() };
    assert!(matches!(fit_series(&data, 0.5, &opts), Err(LabError::IllConditioned { .. })));
    let few = &data[..5];
    assert!(matches!(fit_series(few, 0.5, &FitOptions::default()), Err(LabError::InsufficientData(_))));
    assert!(fit_series(&data, 0.5, &FitOptions { stages: 7, ..Default::default() }).is_err());
}

#[test]
fn glued_approximation_is_c1_at_the_matching_point() {
    let f = fixture();
    for t in [10.0, 100.0, 1e3, 1e4, 1e5] {
        let g = build_uapp(&f.inner, &f.outer, 0.05, t).unwrap();
        let scale = g.v_plus(g.match_y).unwrap().0.abs().max(1.0);
        assert!(g.continuity_jump().unwrap() < 1e-12 * scale, "t = {t}");
        assert!(g.derivative_jump_after().unwrap().abs() < 1e-12 * scale, "t = {t}");
        assert!((g.derivative_jump_before().unwrap() + g.k_jump).abs() < 1e-12 * scale);
    }
}

#[test]
fn glue_rejects_bad_parameters() {
    let f = fixture();
    assert!(matches!(build_uapp(&f.inner, &f.outer, 0.2, 100.0), Err(LabError::InvalidEpsilon(_))));
    assert!(matches!(build_uapp(&f.inner, &f.outer, 0.05, 1.0), Err(LabError::TimeTooSmall(_))));
}

#[test]
fn fitted_ledger_is_balanced() {
    let f = fixture();
    let fit = ShiftFit { alpha0: -0.3, alpha1: 4.0, mu: mu_star(), higher: 0.0, level: 0.5, rms: 0.0 };
    let l = ledger_from_fit(&fit, &f.inner, f.v3bar_slope);
    assert!(l.balance_defect() < 1e-12);
    assert_eq!(l.alpha1(), 4.0);
    let t: f64 = 300.0;
    assert!((l.shift(t) - fit.sigma(t)).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Exact data from the stage-6 model is refit exactly.
    #[test]
    fn fit_model_identity(a in -3.0f64..3.0, b in -8.0f64..0.0, mu in -2.0f64..2.0, big_b in -5.0f64..5.0, higher in prop::bool::ANY) {
        let c = if higher { 3.0 } else { 0.0 };
        let data: Vec<(f64, f64)> = times(100.0, 1e4, 300).into_iter().map(|t| (t, model(t, a, b, mu, big_b) + c * t.powf(-1.5))).collect();
        let opts = FitOptions { stages: 6, freeze_sqrt: false, higher_order: higher, condition_threshold: f64::INFINITY, ..Default::default() };
        let rep = fit_series(&data, 0.5, &opts).unwrap();
        prop_assert!((rep.constant.unwrap() - a).abs() < 1e-8);
        prop_assert!((rep.sqrt_coeff.unwrap() - b).abs() < 1e-6);
        prop_assert!((rep.mu.unwrap() - mu).abs() < 1e-5);
        prop_assert!((rep.inv_t.unwrap() - big_b).abs() < 1e-4);
        prop_assert!(rep.stages.last().unwrap().rms < 1e-10);
    }

    /// `-varphi'' + varphi = delta(x - t^eps)` with `varphi(0) = 0`.
    #[test]
    fn glue_function_is_the_green_function(t in 3.0f64..1e6, eps in 0.01f64..0.12, s in 0.05f64..3.0) {
        let m = t.powf(eps);
        let (l, r) = glue_phi_derivative(t, eps, m);
        prop_assert!((r - l + 1.0).abs() < 1e-12);
        let x = s * m;
        prop_assume!((x - m).abs() > 1e-3);
        let h = 1e-4;
        let d2 = (glue_phi(t, eps, x + h) - 2.0 * glue_phi(t, eps, x) + glue_phi(t, eps, x - h)) / (h * h);
        prop_assert!((-d2 + glue_phi(t, eps, x)).abs() < 1e-5);
    }

    #[test]
    fn cutoff_is_a_bump(s in -1.0f64..3.0) {
        let c = cutoff(s);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(c == 0.0, s <= 0.0 || s >= 2.0);
        prop_assert!((cutoff(2.0 - s) - c).abs() < 1e-15);
    }
}
