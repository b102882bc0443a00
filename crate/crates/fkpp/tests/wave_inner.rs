use std::sync::OnceLock;

use fkpp::inner_expansion::{compare_with_left_iteration, left_iteration, normalize_gauge, solve_inner, InnerTerm};
use fkpp::traveling_wave::{left_rate, solve_wave, standard_wave, WaveProfile};
use proptest::prelude::*;

fn wave() -> &'static WaveProfile {
    static W: OnceLock<WaveProfile> = OnceLock::new();
    W.get_or_init(standard_wave)
}

fn inner() -> &'static InnerTerm {
    static I: OnceLock<InnerTerm> = OnceLock::new();
    I.get_or_init(|| solve_inner(wave()).unwrap())
}

#[test]
fn normalization_does_not_depend_on_the_window() {
    let w = wave();
    let shifted = solve_wave(-35.0, 45.0, 0.005).unwrap();
    let worst = (-100..=200).map(|i| i as f64 * 0.1).map(|x| (w.phi(x) - shifted.phi(x)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
    assert!((w.k - shifted.k).abs() < 1e-6);
}

#[test]
fn profile_is_decreasing_and_solves_the_ode() {
    let w = wave();
    assert!((1..w.len() - 1).all(|i| w.dphi_at(i) < 0.0));
    assert!(w.ode_residual() < 1e-8);
    assert!((w.left_tail_rate() - left_rate()).abs() < 1e-3);
    assert!(w.omega > 0.0 && w.omega < 1.0, "omega = {}", w.omega);
}

#[test]
fn inner_term_residuals() {
    let inn = inner();
    assert!(inn.ode_residual(-10.0, 15.0) < 1e-7);
    assert!(inn.homogeneous_residual(-10.0, 15.0) < 1e-7);
    assert!(inn.psi_residual(-10.0, 15.0) < 1e-6);
    assert!((inn.tail[0] + 0.25).abs() < 1e-6);
    assert!((inn.tail[1] - 0.75).abs() < 1e-6);
    assert!(inn.tail[3].abs() < 1e-8);
}

#[test]
fn c1_is_insensitive_to_the_right_boundary() {
    let base = inner().c1_minus;
    for x_hi in [48.0, 52.0] {
        let other = solve_inner(&solve_wave(-30.0, x_hi, 0.005).unwrap()).unwrap();
        assert!((other.c1_minus - base).abs() < 1e-5, "x_hi = {x_hi}: {} vs {base}", other.c1_minus);
    }
}

#[test]
fn left_volterra_iteration_matches_modulo_the_homogeneous_mode() {
    let samples = left_iteration(wave(), 0.05, 0.02);
    assert!(samples.len() > 100);
    let rel = compare_with_left_iteration(inner(), &samples);
    assert!(rel < 1e-3, "relative distance {rel:e}");
}

#[test]
fn zero_shift_is_the_identity() {
    let inn = inner();
    let xs: Vec<f64> = (-20..=40).map(|i| i as f64 * 0.5).collect();
    let got = inn.shifted_inner(0.0, 100.0, &xs).unwrap();
    for (x, g) in xs.iter().zip(&got) {
        assert_eq!(*g, inn.wave.v0(*x).0 + inn.v1(*x).0 / 100.0);
    }
    // First-order slope oracle at x = 25, where the cubic tail of V1-
    // dominates: V0-' + V1-'/t is about -2.5 there.
    let at = |z: f64| inn.shifted_inner(z, 100.0, &[25.0]).unwrap()[0];
    let slope = inn.wave.v0(25.0).1 + inn.v1(25.0).1 / 100.0;
    assert!((at(0.01) - at(0.0) - 0.01 * slope).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Adding any multiple of the homogeneous solution and renormalizing
    /// recovers the same inner term.
    #[test]
    fn gauge_is_removed(c in -50.0f64..50.0) {
        let inn = inner();
        let w = &inn.wave;
        let mut v = inn.v1.clone();
        let mut dv = inn.dv1.clone();
        for i in 0..w.len() {
            let x = w.x(i);
            v[i] += c * (w.dv[i] - w.v[i]);
            dv[i] += c * ((-x).exp() * w.v[i] * w.v[i] - w.dv[i]);
        }
        let (back, _, removed, tail, _) = normalize_gauge(w, &v, &dv, inn.window).unwrap();
        prop_assert!((removed - c).abs() < 1e-6 * (1.0 + c.abs()));
        prop_assert!((tail[2] - inn.c1_minus).abs() < 1e-6);
        let worst = (0..w.len()).filter(|&i| w.x(i) <= 30.0).map(|i| (back[i] - inn.v1[i]).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-6, "{worst:e}");
    }

    #[test]
    fn inverse_undoes_phi(x in -15.0f64..25.0) {
        let w = wave();
        let s = w.phi(x);
        prop_assume!(s > 1e-9 && s < 1.0 - 1e-9);
        let back = w.inverse(s).unwrap();
        prop_assert!((back - x).abs() < 1e-6 * (1.0 + 1.0 / (w.dphi(x).abs() * 1e3).min(1.0)));
    }
}
