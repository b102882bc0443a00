//! The universal coefficient `mu*` by three routes:
//!
//! * closed form `9/8 (5 - 6 log 2)`;
//! * `mu = 9/4 - (27/8) <theta', psi_1>` with `<theta', psi_1> = (2/pi) S`
//!   and `S = sum_k (2k+1)! / (4^k (k!)^2 (2k-1)^3)` summed numerically;
//! * the root of the outer solvability residual.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::{integrate, KahanSum};
use crate::outer_expansion::{build_v1_plus, mu_star, solve_mu_root, OuterError};
use crate::spectral_halfline::{factorial, phi_derivative, psi_value, SpectralBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstantsError {
    #[error(transparent)]
    Outer(#[from] OuterError),
    #[error("routes {first} and {second} disagree by {diff:e} (tolerance {tolerance:e})")]
    CrossValidationFailure { first: &'static str, second: &'static str, diff: f64, tolerance: f64 },
}

/// `pi/2 (2 log 2 - 1)`.
pub fn series_closed_form() -> f64 {
    PI / 2.0 * (2.0 * 2f64.ln() - 1.0)
}

/// Term `k` of the series, by direct evaluation (small `k` only).
pub fn series_term(k: usize) -> f64 {
    let m = 2.0 * k as f64 - 1.0;
    factorial(2 * k + 1) / (4f64.powi(k as i32) * factorial(k).powi(2) * m * m * m)
}

/// Partial sum of the first `n` terms and the integral-comparison tail.
///
/// Terms follow the ratio recurrence, never raw factorials. The tail uses
/// `t_k ~ k^-5/2 (1 + 15/(8k)) / (4 sqrt(pi))` integrated from `n - 1/2`.
pub fn sum_lemma_series(n: usize) -> (f64, f64) {
    let mut acc = KahanSum::default();
    let mut t = -1.0;
    for k in 0..n {
        acc.add(t);
        let kf = k as f64;
        let a = 2.0 * kf - 1.0;
        let b = 2.0 * kf + 1.0;
        t *= (2.0 * kf + 2.0) * (2.0 * kf + 3.0) / (4.0 * (kf + 1.0) * (kf + 1.0)) * (a * a * a) / (b * b * b);
    }
    (acc.value(), series_tail(n))
}

/// Tail estimate `sum_{k >= n} t_k`.
pub fn series_tail(n: usize) -> f64 {
    let c = 1.0 / (4.0 * PI.sqrt());
    let m = n as f64 - 0.5;
    c * (2.0 / 3.0 * m.powf(-1.5) + 15.0 / 8.0 * 0.4 * m.powf(-2.5))
}

/// `int_0^1 arcsin(y)/y dy`, computed as `int_0^{pi/2} u cot u du`.
pub fn arcsin_over_y_integral() -> f64 {
    integrate(u_cot_u, 0.0, PI / 2.0, 1e-15, 1e-15).0
}

/// `int_0^{1/2} arcsin(y)/y dy`, for the positivity sanity check.
pub fn arcsin_over_y_half() -> f64 {
    integrate(u_cot_u, 0.0, (0.5f64).asin(), 1e-15, 1e-15).0
}

fn u_cot_u(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 3.0
    } else {
        u / u.tan()
    }
}

/// `int_{-pi/2}^{pi/2} log cos u du`, by symmetry `2 int_0^{pi/2} log sin w dw`
/// with the logarithmic singularity subtracted analytically.
pub fn log_cos_integral() -> f64 {
    let smooth = |w: f64| {
        if w < 1e-6 {
            -w * w / 6.0
        } else {
            (w.sin() / w).ln()
        }
    };
    let h = PI / 2.0;
    let singular = h * (h.ln() - 1.0);
    2.0 * (singular + integrate(smooth, 0.0, h, 1e-16, 1e-16).0)
}

/// Both routes to `<theta', psi_1>` with their termwise consistency data.
#[derive(Debug, Clone)]
pub struct ThetaReport {
    pub series: f64,
    pub quadrature: f64,
    /// `(k, -c_k <phi_k, psi_1'>, (2/pi) t_k)` for the first terms.
    pub termwise: Vec<(usize, f64, f64)>,
}

/// `<theta', psi_1>` from the series and from the Dirichlet solve
/// `(L - 1/2) theta = phi_0'` plus quadrature.
pub fn theta_prime_psi1(basis: &SpectralBasis, n_terms: usize) -> Result<ThetaReport, ConstantsError> {
    let (s, tail) = sum_lemma_series(n_terms);
    let series = 2.0 / PI * (s + tail);
    let dphi0 = basis.sample(|e| phi_derivative(0, 1, e));
    let theta = basis.dirichlet_solve(0.5, &dphi0).map_err(OuterError::from)?;
    let dtheta = basis.derivative(&theta).map_err(OuterError::from)?;
    let quadrature = basis.projection_onto(&dtheta, 1).map_err(OuterError::from)?;
    // psi_1' = (eta^2 - 2) / (4 sqrt(pi)).
    let dpsi1 = basis.sample(|e| (e * e - 2.0) / (4.0 * PI.sqrt()));
    let mut termwise = Vec::new();
    for k in 0..=8 {
        let proj = basis.projection_onto(&dphi0, k).map_err(OuterError::from)?;
        let ck = proj / (k as f64 - 0.5);
        let phik = basis.phi_fn(k);
        let pk = basis.inner_product(&phik, &dpsi1).map_err(OuterError::from)?;
        termwise.push((k, -ck * pk, 2.0 / PI * series_term(k)));
    }
    Ok(ThetaReport { series, quadrature, termwise })
}

/// `<phi_0', psi_k>` by quadrature.
pub fn claim_quadrature(basis: &SpectralBasis, k: usize) -> f64 {
    basis
        .nodes
        .iter()
        .zip(&basis.weights)
        .map(|(&e, w)| w * phi_derivative(0, 1, e) * psi_value(k, e))
        .sum()
}

/// `(-1)^k / (sqrt(pi) (2k-1) k!)`.
pub fn claim_closed_form(k: usize) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / (PI.sqrt() * (2.0 * k as f64 - 1.0) * factorial(k))
}

/// `mu = 9/4 - (27/8) <theta', psi_1>`.
pub fn mu_from_theta(theta_prime_psi1: f64) -> f64 {
    9.0 / 4.0 - 27.0 / 8.0 * theta_prime_psi1
}

/// Cross-validated `mu*` and the constants feeding it.
#[derive(Debug, Clone)]
pub struct MuReport {
    pub mu_closed: f64,
    pub mu_series: f64,
    pub mu_root: f64,
    pub theta_prime_psi1: f64,
    pub theta_prime_psi1_quadrature: f64,
    pub series_sum: f64,
    pub arcsin_integral: f64,
    pub term_count: usize,
    pub tail_estimate: f64,
}

impl MuReport {
    pub fn max_discrepancy(&self) -> f64 {
        let v = [self.mu_closed, self.mu_series, self.mu_root];
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..i {
                m = m.max((v[i] - v[j]).abs());
            }
        }
        m
    }
}

/// Default number of series terms.
pub const DEFAULT_TERMS: usize = 1_000_000;

/// Run all three routes and check pairwise agreement.
pub fn compute_mu(basis: &SpectralBasis, n_terms: usize) -> Result<MuReport, ConstantsError> {
    let (s, tail) = sum_lemma_series(n_terms);
    let theta = theta_prime_psi1(basis, n_terms)?;
    let v1 = build_v1_plus(basis)?;
    let mu_root = solve_mu_root(basis, &v1)?;
    let report = MuReport {
        mu_closed: mu_star(),
        mu_series: mu_from_theta(theta.series),
        mu_root,
        theta_prime_psi1: theta.series,
        theta_prime_psi1_quadrature: theta.quadrature,
        series_sum: s + tail,
        arcsin_integral: arcsin_over_y_integral(),
        term_count: n_terms,
        tail_estimate: tail,
    };
    let checks = [
        ("closed", "series", report.mu_closed, report.mu_series, 1e-7),
        ("closed", "root", report.mu_closed, report.mu_root, 1e-6),
        ("series", "root", report.mu_series, report.mu_root, 1e-5),
    ];
    for (first, second, x, y, tolerance) in checks {
        let diff = (x - y).abs();
        if diff > tolerance {
            return Err(ConstantsError::CrossValidationFailure { first, second, diff, tolerance });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        assert_eq!(series_term(0), -1.0);
        assert_eq!(series_term(1), 1.5);
        let (s2, _) = sum_lemma_series(2);
        assert_eq!(s2, 0.5);
    }

    #[test]
    fn recurrence_matches_direct_terms() {
        let (mut prev, _) = sum_lemma_series(0);
        for n in 1..20 {
            let (s, _) = sum_lemma_series(n);
            let t = s - prev;
            assert!((t - series_term(n - 1)).abs() < 1e-13 * t.abs().max(1.0), "n={n}");
            prev = s;
        }
    }

    #[test]
    fn perturbation_shifts_mu_linearly() {
        let base = mu_from_theta(2.0 * 2f64.ln() - 1.0);
        assert!((base - mu_star()).abs() < 1e-15);
        assert!((mu_from_theta(2.0 * 2f64.ln() - 1.0 + 0.01) - base + 0.03375).abs() < 1e-14);
    }
}
