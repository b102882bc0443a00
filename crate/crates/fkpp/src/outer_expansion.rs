//! Outer expansion at the diffusive scale `eta = x / sqrt(t)`:
//!
//! `V+ = e^{tau/2} V0+ + V1+ + tau e^{-tau/2} V2+ + e^{-tau/2} V3+`
//!
//! with every term Dirichlet at `eta = 0`. The solvability of the `V3+`
//! equation against `psi_1` fixes the `log t / t` coefficient, and the slope
//! balance with the inner term fixes `alpha_1` once `q3` is chosen.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::spectral_halfline::{phi_derivative, phi_slope_at_zero, HalfLineFunction, SpectralBasis, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OuterError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("solvability residual has slope {slope} in mu, expected 2/3")]
    DegenerateSlope { slope: f64 },
}

/// `mu* = 9/8 (5 - 6 log 2)`.
pub fn mu_star() -> f64 {
    9.0 / 8.0 * (5.0 - 6.0 * 2f64.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterLabel {
    V0,
    V1,
    V2,
    V3,
}

impl OuterLabel {
    pub fn name(&self) -> &'static str {
        match self {
            OuterLabel::V0 => "V0+",
            OuterLabel::V1 => "V1+",
            OuterLabel::V2 => "V2+",
            OuterLabel::V3 => "V3+",
        }
    }
}

/// One outer term with its boundary data at `eta = 0`.
#[derive(Debug, Clone)]
pub struct OuterTerm {
    pub label: OuterLabel,
    pub function: HalfLineFunction,
    pub value_at_zero: f64,
    /// First three derivatives at `eta = 0`.
    pub derivs_at_zero: [f64; 3],
    /// Eigen-coefficients when the term is a finite `phi_k` combination.
    pub eigen: Option<Vec<f64>>,
}

fn finish(basis: &SpectralBasis, label: OuterLabel, function: HalfLineFunction, eigen: Option<Vec<f64>>) -> Result<OuterTerm, OuterError> {
    let value_at_zero = basis.value_at(&function, 0.0)?;
    let derivs_at_zero = [
        basis.boundary_derivative(&function, 1)?,
        basis.boundary_derivative(&function, 2)?,
        basis.boundary_derivative(&function, 3)?,
    ];
    Ok(OuterTerm { label, function, value_at_zero, derivs_at_zero, eigen })
}

/// `V0+ = phi_0` (the matching forces `q0 = 1`).
pub fn build_v0_plus(basis: &SpectralBasis) -> Result<OuterTerm, OuterError> {
    let mut t = finish(basis, OuterLabel::V0, basis.phi_fn(0), Some(vec![1.0]))?;
    t.derivs_at_zero = [phi_derivative(0, 1, 0.0), phi_derivative(0, 2, 0.0), phi_derivative(0, 3, 0.0)];
    Ok(t)
}

/// `(L - 1/2) V1+ = -(3/2) phi_0' - (3 sqrt(pi)/2) phi_0`.
pub fn build_v1_plus(basis: &SpectralBasis) -> Result<OuterTerm, OuterError> {
    let c = 1.5 * PI.sqrt();
    let rhs = basis.sample(|e| -1.5 * phi_derivative(0, 1, e) - c * phi_derivative(0, 0, e));
    let v = basis.dirichlet_solve(0.5, &rhs)?;
    finish(basis, OuterLabel::V1, v, None)
}

/// `V2+ = -mu (phi_0 + (2/3) phi_1)`.
pub fn build_v2_plus(basis: &SpectralBasis, mu: f64) -> Result<OuterTerm, OuterError> {
    let coeffs = vec![-mu, -2.0 * mu / 3.0];
    let mut t = finish(basis, OuterLabel::V2, HalfLineFunction::Eigen { coeffs: coeffs.clone() }, Some(coeffs))?;
    t.value_at_zero = 0.0;
    t.derivs_at_zero[0] = v2_slope_at_zero(mu);
    Ok(t)
}

/// `(V2+)'(0)`, formed so that the cancellation is exact in floating point.
pub fn v2_slope_at_zero(mu: f64) -> f64 {
    -mu * (phi_slope_at_zero(0) + 2.0 * phi_slope_at_zero(1) / 3.0)
}

fn v3_rhs(basis: &SpectralBasis, mu: f64, v1: &OuterTerm) -> Result<HalfLineFunction, OuterError> {
    let c = 1.5 * PI.sqrt();
    let v1g = basis.to_grid(&v1.function)?;
    let dv1 = basis.to_grid(&basis.derivative(&v1.function)?)?;
    let vals = basis
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            2.0 / 3.0 * mu * phi_derivative(1, 0, e) - 1.5 * dv1[i] - c * v1g[i] + c * phi_derivative(0, 1, e)
        })
        .collect();
    Ok(basis.grid(vals))
}

/// `<(2/3) mu phi_1 - (3/2) V1+' - (3 sqrt(pi)/2) V1+ + (3 sqrt(pi)/2) phi_0', psi_1>`.
pub fn solvability_residual(mu: f64, basis: &SpectralBasis, v1: &OuterTerm) -> Result<f64, OuterError> {
    let rhs = v3_rhs(basis, mu, v1)?;
    Ok(basis.projection_onto(&rhs, 1)?)
}

/// Root of the affine solvability residual.
pub fn solve_mu_root(basis: &SpectralBasis, v1: &OuterTerm) -> Result<f64, OuterError> {
    let r0 = solvability_residual(0.0, basis, v1)?;
    let r1 = solvability_residual(1.0, basis, v1)?;
    let slope = r1 - r0;
    if (slope - 2.0 / 3.0).abs() > 1e-6 {
        return Err(OuterError::DegenerateSlope { slope });
    }
    Ok(-r0 / slope)
}

/// `V3+ = V3bar - alpha_1 phi_0 + q3 phi_1`; `V3bar` solves the resonant
/// equation with `alpha_1 = 0` and carries no `phi_1` component.
#[derive(Debug, Clone)]
pub struct V3Plus {
    pub term: OuterTerm,
    pub bar: OuterTerm,
    pub bar_slope: f64,
}

/// Tolerance on the solvability projection accepted when building `V3+`.
pub const V3_SOLVABILITY_TOL: f64 = 1e-5;

pub fn build_v3_plus(basis: &SpectralBasis, mu: f64, alpha1: f64, q3: f64, v1: &OuterTerm) -> Result<V3Plus, OuterError> {
    let rhs = v3_rhs(basis, mu, v1)?;
    let bar = basis.dirichlet_solve_tol(1.0, &rhs, V3_SOLVABILITY_TOL)?;
    let bar = finish(basis, OuterLabel::V3, bar, None)?;
    let barg = basis.to_grid(&bar.function)?;
    let vals = basis
        .nodes
        .iter()
        .enumerate()
        .map(|(i, &e)| barg[i] - alpha1 * phi_derivative(0, 0, e) + q3 * phi_derivative(1, 0, e))
        .collect();
    let mut term = finish(basis, OuterLabel::V3, basis.grid(vals), None)?;
    term.derivs_at_zero[0] = bar.derivs_at_zero[0] - alpha1 * phi_slope_at_zero(0) + q3 * phi_slope_at_zero(1);
    Ok(V3Plus { bar_slope: bar.derivs_at_zero[0], bar, term })
}

/// `alpha_1 = (V3bar)'(0) - (3/2) q3 - C1-`.
pub fn balance_alpha1(v3bar_slope: f64, c1_minus: f64, q3: f64) -> f64 {
    v3bar_slope - 1.5 * q3 - c1_minus
}

/// Inverse of [`balance_alpha1`]: the `q3` that makes a given `alpha_1` balance.
pub fn balance_q3(v3bar_slope: f64, c1_minus: f64, alpha1: f64) -> f64 {
    (v3bar_slope - c1_minus - alpha1) / 1.5
}

/// Index `(a, b)` of the order `t^-a log^b t`, with `a` a half-integer
/// stored as `2a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey {
    pub two_a: i32,
    pub b: i32,
}

impl OrderKey {
    pub const fn new(two_a: i32, b: i32) -> Self {
        OrderKey { two_a, b }
    }

    pub fn a(&self) -> f64 {
        self.two_a as f64 / 2.0
    }
}

impl std::fmt::Display for OrderKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.two_a % 2 == 0 {
            write!(f, "({},{})", self.two_a / 2, self.b)
        } else {
            write!(f, "({}/2,{})", self.two_a, self.b)
        }
    }
}

/// The three index sets of the complete expansion, exactly as printed:
/// `Omega- = {(0,0)} u {a >= 1, 0 <= b <= a-1}`,
/// `Omega+ = {a >= 0, 0 <= b <= a}`,
/// `Omega_sigma = {(-1,0), (1,1)} u Omega+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaSet {
    Inner,
    Outer,
    Shift,
}

impl OmegaSet {
    pub fn contains(&self, k: OrderKey) -> bool {
        // a >= c  <=>  2a >= 2c, and b <= a - 1  <=>  2b <= 2a - 2.
        match self {
            OmegaSet::Inner => (k.two_a == 0 && k.b == 0) || (k.two_a >= 2 && k.b >= 0 && 2 * k.b <= k.two_a - 2),
            OmegaSet::Outer => k.two_a >= 0 && k.b >= 0 && 2 * k.b <= k.two_a,
            OmegaSet::Shift => k == OrderKey::new(-2, 0) || k == OrderKey::new(2, 1) || OmegaSet::Outer.contains(k),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OmegaSet::Inner => "Omega-",
            OmegaSet::Outer => "Omega+",
            OmegaSet::Shift => "Omega_sigma",
        }
    }
}

pub const KEY_SPEED: OrderKey = OrderKey::new(-2, 0);
pub const KEY_LOG: OrderKey = OrderKey::new(0, 1);
pub const KEY_ALPHA0: OrderKey = OrderKey::new(0, 0);
pub const KEY_SQRT: OrderKey = OrderKey::new(1, 0);
pub const KEY_MU: OrderKey = OrderKey::new(2, 1);
pub const KEY_ALPHA1: OrderKey = OrderKey::new(2, 0);

/// Shift coefficients `sigma_{a,b}` and the keys of the inner/outer terms
/// constructed so far, plus the data tying `alpha_1` to `q3` and `C1-`.
#[derive(Debug, Clone)]
pub struct ExpansionLedger {
    pub sigma: BTreeMap<OrderKey, f64>,
    pub inner_keys: Vec<OrderKey>,
    pub outer_keys: Vec<OrderKey>,
    pub alpha0: f64,
    pub q3: f64,
    pub c1_minus: f64,
    pub v3bar_slope: f64,
}

impl ExpansionLedger {
    /// Ledger through order `t^-1` with `alpha_1` set from the balance.
    pub fn new(mu: f64, alpha0: f64, q3: f64, c1_minus: f64, v3bar_slope: f64) -> Self {
        let alpha1 = balance_alpha1(v3bar_slope, c1_minus, q3);
        let mut sigma = BTreeMap::new();
        sigma.insert(KEY_SPEED, 2.0);
        sigma.insert(KEY_LOG, -1.5);
        sigma.insert(KEY_ALPHA0, alpha0);
        sigma.insert(KEY_SQRT, -3.0 * PI.sqrt());
        sigma.insert(KEY_MU, mu);
        sigma.insert(KEY_ALPHA1, alpha1);
        ExpansionLedger {
            sigma,
            inner_keys: vec![OrderKey::new(0, 0), OrderKey::new(2, 0)],
            outer_keys: vec![OrderKey::new(0, 0), OrderKey::new(1, 0), OrderKey::new(2, 1), OrderKey::new(2, 0)],
            alpha0,
            q3,
            c1_minus,
            v3bar_slope,
        }
    }

    pub fn get(&self, k: OrderKey) -> f64 {
        self.sigma.get(&k).copied().unwrap_or(0.0)
    }

    pub fn mu(&self) -> f64 {
        self.get(KEY_MU)
    }

    pub fn alpha1(&self) -> f64 {
        self.get(KEY_ALPHA1)
    }

    /// Replace `alpha_1` and move `q3` so the balance keeps holding.
    pub fn set_alpha1(&mut self, alpha1: f64) {
        self.sigma.insert(KEY_ALPHA1, alpha1);
        self.q3 = balance_q3(self.v3bar_slope, self.c1_minus, alpha1);
    }

    pub fn set_alpha0(&mut self, alpha0: f64) {
        self.alpha0 = alpha0;
        self.sigma.insert(KEY_ALPHA0, alpha0);
    }

    /// `|C1- - ((V3bar)'(0) - alpha_1 - (3/2) q3)|`.
    pub fn balance_defect(&self) -> f64 {
        (self.c1_minus - (self.v3bar_slope - self.alpha1() - 1.5 * self.q3)).abs()
    }

    /// `sigma(t) = sum sigma_{a,b} t^-a log^b t`.
    pub fn shift(&self, t: f64) -> f64 {
        self.sigma.iter().map(|(k, v)| v * t.powf(-k.a()) * t.ln().powi(k.b)).sum()
    }
}

/// Outcome of checking the ledger against the index sets.
#[derive(Debug, Clone)]
pub struct OmegaReport {
    pub violations: Vec<(OmegaSet, OrderKey)>,
    /// (key, expected, stored) for the six order <= 1 shift coefficients.
    pub identities: Vec<(OrderKey, f64, f64)>,
}

impl OmegaReport {
    pub fn identities_hold(&self) -> bool {
        self.identities.iter().all(|(_, e, s)| e == s)
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.identities_hold()
    }
}

pub fn validate_omega(ledger: &ExpansionLedger) -> OmegaReport {
    let mut violations = Vec::new();
    for &k in &ledger.inner_keys {
        if !OmegaSet::Inner.contains(k) {
            violations.push((OmegaSet::Inner, k));
        }
    }
    for &k in &ledger.outer_keys {
        if !OmegaSet::Outer.contains(k) {
            violations.push((OmegaSet::Outer, k));
        }
    }
    for &k in ledger.sigma.keys() {
        if !OmegaSet::Shift.contains(k) {
            violations.push((OmegaSet::Shift, k));
        }
    }
    let expected = [
        (KEY_SPEED, 2.0),
        (KEY_LOG, -1.5),
        (KEY_ALPHA0, ledger.alpha0),
        (KEY_SQRT, -3.0 * PI.sqrt()),
        (KEY_MU, mu_star()),
        (KEY_ALPHA1, balance_alpha1(ledger.v3bar_slope, ledger.c1_minus, ledger.q3)),
    ];
    let identities = expected.iter().map(|&(k, e)| (k, e, ledger.get(k))).collect();
    OmegaReport { violations, identities }
}

/// All four outer terms for a given `mu`, `alpha_1`, `q3`.
#[derive(Debug, Clone)]
pub struct OuterSolution {
    pub v0: OuterTerm,
    pub v1: OuterTerm,
    pub v2: OuterTerm,
    pub v3: V3Plus,
}

impl OuterSolution {
    pub fn build(basis: &SpectralBasis, mu: f64, alpha1: f64, q3: f64) -> Result<Self, OuterError> {
        let v0 = build_v0_plus(basis)?;
        let v1 = build_v1_plus(basis)?;
        let v2 = build_v2_plus(basis, mu)?;
        let v3 = build_v3_plus(basis, mu, alpha1, q3, &v1)?;
        Ok(OuterSolution { v0, v1, v2, v3 })
    }

    /// `V+(tau, eta)` and `d V+/d eta` with `tau = log t`.
    pub fn evaluate(&self, basis: &SpectralBasis, t: f64, eta: f64) -> Result<(f64, f64), OuterError> {
        let tau = t.ln();
        let terms: [(&OuterTerm, f64); 4] = [
            (&self.v0, t.sqrt()),
            (&self.v1, 1.0),
            (&self.v2, tau / t.sqrt()),
            (&self.v3.term, 1.0 / t.sqrt()),
        ];
        let mut v = 0.0;
        let mut dv = 0.0;
        for (term, w) in terms {
            v += w * basis.value_at(&term.function, eta)?;
            dv += w * derivative_at(basis, &term.function, eta)?;
        }
        Ok((v, dv))
    }
}

fn derivative_at(basis: &SpectralBasis, f: &HalfLineFunction, eta: f64) -> Result<f64, SpectralError> {
    if let HalfLineFunction::Eigen { coeffs } = f {
        return Ok(coeffs.iter().enumerate().map(|(k, c)| c * phi_derivative(k, 1, eta)).sum());
    }
    let d = basis.derivative(f)?;
    basis.value_at(&d, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v2_slope_cancels_exactly() {
        for mu in [1.0, mu_star(), 0.1, 37.5, -2.25] {
            assert_eq!(v2_slope_at_zero(mu), 0.0);
        }
    }

    #[test]
    fn omega_membership_examples() {
        assert!(OmegaSet::Shift.contains(OrderKey::new(2, 1)));
        assert!(!OmegaSet::Inner.contains(OrderKey::new(1, 1)));
        assert!(OmegaSet::Outer.contains(OrderKey::new(0, 0)));
        assert!(OmegaSet::Inner.contains(OrderKey::new(0, 0)));
        assert!(!OmegaSet::Inner.contains(OrderKey::new(1, 0)));
        assert!(OmegaSet::Inner.contains(OrderKey::new(3, 0)));
    }

    #[test]
    fn balance_is_affine() {
        let a = balance_alpha1(0.7, 0.2, 0.0);
        assert!((a - 0.5).abs() < 1e-15);
        assert!((balance_alpha1(0.7, 1.2, 0.0) - (a - 1.0)).abs() < 1e-15);
        assert!((balance_alpha1(0.7, 0.2, 2.0) - (a - 3.0)).abs() < 1e-15);
        assert!((balance_q3(0.7, 0.2, balance_alpha1(0.7, 0.2, 1.3)) - 1.3).abs() < 1e-14);
    }

    #[test]
    fn ledger_shift_reproduces_formula() {
        let l = ExpansionLedger::new(mu_star(), 0.3, 0.0, 0.1, 0.4);
        let t: f64 = 50.0;
        let expected = 2.0 * t - 1.5 * t.ln() + 0.3 - 3.0 * PI.sqrt() / t.sqrt() + mu_star() * t.ln() / t + 0.3 / t;
        assert!((l.shift(t) - expected).abs() < 1e-12);
    }
}
