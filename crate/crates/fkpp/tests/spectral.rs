use std::sync::OnceLock;

use fkpp::spectral_halfline::{hermite, hermite_even_at_zero, hermite_value, phi_value, HalfLineFunction, SpectralBasis, SpectralError};
use num_bigint::BigInt;
use proptest::prelude::*;

fn basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(SpectralBasis::standard)
}

/// Grid samples of `sum c_k phi_k`, i.e. an odd polynomial times `e^{-eta^2/4}`.
fn in_span(coeffs: &[f64]) -> HalfLineFunction {
    let b = basis();
    b.grid(b.to_grid(&HalfLineFunction::eigen(coeffs.to_vec())).unwrap())
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 6)
}

#[test]
fn hermite_derivative_lowers_index() {
    for n in 1..=40 {
        assert_eq!(hermite(n).derivative(), hermite(n - 1).scale(n as i64), "n = {n}");
    }
}

#[test]
fn even_hermite_values_at_origin() {
    for k in 0..=20 {
        assert_eq!(hermite(2 * k).value_at_zero(), hermite_even_at_zero(k));
        assert_eq!(hermite(2 * k + 1).value_at_zero(), BigInt::from(0));
    }
}

#[test]
fn biorthogonality_and_eigen_residual() {
    let b = basis();
    assert!(b.biorthogonality_error(8).2 < 1e-10);
    for k in 0..8 {
        assert!(b.eigen_residual(k) < 1e-8, "k = {k}");
    }
}

#[test]
fn eigenfunctions_vanish_at_the_boundary() {
    for k in 0..12 {
        assert_eq!(phi_value(k, 0.0), 0.0);
    }
}

#[test]
fn resonant_solve_needs_solvability() {
    let b = basis();
    let f = in_span(&[0.0, 1.0]);
    assert!(matches!(b.dirichlet_solve(1.0, &f), Err(SpectralError::SolvabilityViolation { k: 1, .. })));
    // The phi_0 component alone is orthogonal to psi_1.
    let g = in_span(&[1.0]);
    assert!(b.dirichlet_solve(1.0, &g).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn exact_and_recurrence_hermite_agree(n in 0usize..30, x in -6i64..6) {
        let exact = hermite(n).eval_integer(x);
        let float = hermite_value(n, x as f64);
        let e: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!((e - float).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn resolvent_backends_agree(c in coeffs(), half in prop::bool::ANY) {
        let b = basis();
        let lambda = if half { 0.5 } else { 1.5 };
        let f = in_span(&c);
        let bvp = b.dirichlet_solve(lambda, &f).unwrap();
        let eig = b.dirichlet_solve_eigen(lambda, &f, 1e-6).unwrap();
        prop_assert!(b.l2_distance(&bvp, &eig).unwrap() < 1e-6);
    }

    #[test]
    fn apply_inverts_dirichlet_solve(c in coeffs(), lambda in 0.1f64..4.9) {
        prop_assume!((lambda - lambda.round()).abs() > 0.05);
        let b = basis();
        let f = in_span(&c);
        let v = b.dirichlet_solve(lambda, &f).unwrap();
        let back = b.apply(lambda, &v).unwrap();
        let (fv, bv) = (b.to_grid(&f).unwrap(), b.to_grid(&back).unwrap());
        // Interior collocation rows only; the end rows carry the boundary conditions.
        let n = fv.len();
        let err = (1..n - 1).map(|i| (fv[i] - bv[i]).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-8, "err {err}");
        let vv = b.to_grid(&v).unwrap();
        prop_assert!(vv[0].abs() < 1e-10, "v(0) = {}", vv[0]);
    }

    #[test]
    fn projection_recovers_coefficients(c in coeffs()) {
        let b = basis();
        let p = b.project(&in_span(&c)).unwrap();
        for (k, ck) in c.iter().enumerate() {
            prop_assert!((p[k] - ck).abs() < 1e-9);
        }
    }
}
