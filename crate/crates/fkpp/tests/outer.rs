use std::sync::OnceLock;

use fkpp::outer_expansion::*;
use fkpp::spectral_halfline::SpectralBasis;
use proptest::prelude::*;

struct Fixture {
    basis: SpectralBasis,
    v1: OuterTerm,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let basis = SpectralBasis::standard();
        let v1 = build_v1_plus(&basis).unwrap();
        Fixture { basis, v1 }
    })
}

fn key() -> impl Strategy<Value = OrderKey> {
    (-6i32..12, -3i32..6).prop_map(|(a, b)| OrderKey::new(a, b))
}

#[test]
fn root_matches_closed_form() {
    let f = fixture();
    let root = solve_mu_root(&f.basis, &f.v1).unwrap();
    assert!((root - mu_star()).abs() < 1e-5);
    assert!((mu_star() - 9.0 / 8.0 * (5.0 - 6.0 * 2f64.ln())).abs() < 1e-15);
}

#[test]
fn every_outer_term_satisfies_dirichlet_and_matching_data() {
    let f = fixture();
    let sol = OuterSolution::build(&f.basis, mu_star(), 0.7, 0.2).unwrap();
    for term in [&sol.v0, &sol.v1, &sol.v2, &sol.v3.term] {
        assert!(f.basis.value_at(&term.function, 0.0).unwrap().abs() < 1e-8, "{:?}", term.label);
    }
    assert!((sol.v0.derivs_at_zero[0] - 1.0).abs() < 1e-12);
    assert!(sol.v0.derivs_at_zero[1].abs() < 1e-12);
    assert!((sol.v0.derivs_at_zero[2] + 1.5).abs() < 1e-12);
    assert!(sol.v1.derivs_at_zero[0].abs() < 1e-4);
    assert!((sol.v1.derivs_at_zero[1] - 1.5).abs() < 1e-3);
    assert_eq!(sol.v2.derivs_at_zero[0], 0.0);
}

#[test]
fn printed_index_sets() {
    assert!(OmegaSet::Shift.contains(KEY_SPEED));
    assert!(OmegaSet::Shift.contains(KEY_MU));
    assert!(!OmegaSet::Shift.contains(OrderKey::new(2, 2)));
    assert!(!OmegaSet::Outer.contains(OrderKey::new(-2, 0)));
    assert!(!OmegaSet::Inner.contains(OrderKey::new(2, 1)));
    assert_eq!(OrderKey::new(3, 1).to_string(), "(3/2,1)");
    assert_eq!(OrderKey::new(2, 0).to_string(), "(1,0)");
}

#[test]
fn ledger_validation_reports_the_printed_log_key() {
    let l = ExpansionLedger::new(mu_star(), 0.0, 0.0, 9.7, 3.1);
    let rep = validate_omega(&l);
    assert!(rep.identities_hold());
    assert_eq!(rep.violations, vec![(OmegaSet::Shift, KEY_LOG)]);
    let mut tampered = l.clone();
    tampered.sigma.insert(KEY_MU, 1.0);
    assert!(!validate_omega(&tampered).identities_hold());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn solvability_residual_is_affine_in_mu(mu in -20.0f64..20.0) {
        let f = fixture();
        let r = solvability_residual(mu, &f.basis, &f.v1).unwrap();
        let r0 = solvability_residual(0.0, &f.basis, &f.v1).unwrap();
        prop_assert!((r - r0 - 2.0 / 3.0 * mu).abs() < 1e-10);
    }

    #[test]
    fn balance_round_trip(slope in -10.0f64..10.0, c1 in -10.0f64..10.0, q3 in -10.0f64..10.0) {
        let a1 = balance_alpha1(slope, c1, q3);
        prop_assert!((balance_q3(slope, c1, a1) - q3).abs() < 1e-12);
    }

    #[test]
    fn setting_alpha1_keeps_the_balance(alpha1 in -10.0f64..10.0, alpha0 in -3.0f64..3.0) {
        let mut l = ExpansionLedger::new(mu_star(), 0.0, 0.0, 9.735, 2.5);
        l.set_alpha1(alpha1);
        l.set_alpha0(alpha0);
        prop_assert!(l.balance_defect() < 1e-12);
        prop_assert_eq!(l.alpha1(), alpha1);
        let t: f64 = 400.0;
        let d = l.shift(t) - (2.0 * t - 1.5 * t.ln() + alpha0 - 3.0 * std::f64::consts::PI.sqrt() / t.sqrt() + mu_star() * t.ln() / t + alpha1 / t);
        prop_assert!(d.abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn index_set_relations(k in key()) {
        if OmegaSet::Outer.contains(k) {
            prop_assert!(OmegaSet::Shift.contains(k));
            prop_assert!(k.two_a >= 0 && k.b >= 0 && k.b as f64 <= k.a());
        }
        if OmegaSet::Inner.contains(k) {
            prop_assert!(OmegaSet::Outer.contains(k));
        }
        if k.b < 0 || k.two_a < -2 {
            prop_assert!(!OmegaSet::Shift.contains(k));
        }
    }
}
