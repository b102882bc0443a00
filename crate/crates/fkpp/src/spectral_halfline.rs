//! Half-line eigen-calculus for `L = -d^2 - (eta/2) d - 1` with a Dirichlet
//! condition at `eta = 0`.
//!
//! The eigenfunctions are `phi_k = 4^-k H_{2k+1}(eta) exp(-eta^2/4)` with
//! `L phi_k = k phi_k`, and the adjoint eigenfunctions are the polynomials
//! `psi_k = H_{2k+1} / (2 sqrt(pi) (2k+1)!)`, normalized so that
//! `<phi_i, psi_j> = delta_ij` in `L^2(0, inf)`.
//!
//! Grid functions live on Chebyshev-Lobatto nodes of `[0, eta_max]`. Inner
//! products use Clenshaw-Curtis weights on the same nodes, and derivatives
//! (including boundary derivatives at 0) use the collocation matrix.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::numerics::{cheb_diff, cheb_interp, cheb_nodes, clenshaw_curtis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("not solvable at lambda = {k}: <f, psi_{k}> = {projection:e} exceeds {tolerance:e}")]
    SolvabilityViolation { k: usize, projection: f64, tolerance: f64 },
    #[error("biorthogonality <phi_{i}, psi_{j}> off by {error:e}; quadrature under-resolved")]
    Biorthogonality { i: usize, j: usize, error: f64 },
    #[error("grid of {found} nodes on [0, {found_max}] does not match basis grid of {expected} nodes on [0, {expected_max}]")]
    DomainMismatch { expected: usize, expected_max: f64, found: usize, found_max: f64 },
    #[error("eigen-coefficient vector of length {found} exceeds basis order {order}")]
    TooManyModes { order: usize, found: usize },
    #[error("invalid basis parameter: {0}")]
    InvalidParameter(String),
    #[error("collocation matrix is singular")]
    Singular,
}

/// Scaled Hermite polynomial `H_n = (eta - 2 d)^n 1` with exact integer
/// monomial coefficients (`coeffs[p]` multiplies `eta^p`).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitePoly {
    pub degree: usize,
    pub coeffs: Vec<BigInt>,
}

impl HermitePoly {
    pub fn one() -> Self {
        HermitePoly { degree: 0, coeffs: vec![BigInt::from(1)] }
    }

    /// Exact derivative.
    pub fn derivative(&self) -> HermitePoly {
        if self.degree == 0 {
            return HermitePoly { degree: 0, coeffs: vec![BigInt::zero()] };
        }
        let coeffs = (1..=self.degree).map(|p| &self.coeffs[p] * BigInt::from(p)).collect();
        HermitePoly { degree: self.degree - 1, coeffs }
    }

    /// `(eta - 2 d) self`, the raising step.
    pub fn raise(&self) -> HermitePoly {
        let d = self.derivative();
        let mut coeffs = vec![BigInt::zero(); self.degree + 2];
        for (p, c) in self.coeffs.iter().enumerate() {
            coeffs[p + 1] += c;
        }
        for (p, c) in d.coeffs.iter().enumerate() {
            coeffs[p] -= c * BigInt::from(2);
        }
        HermitePoly { degree: self.degree + 1, coeffs }
    }

    pub fn scale(&self, s: i64) -> HermitePoly {
        HermitePoly { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * BigInt::from(s)).collect() }
    }

    pub fn value_at_zero(&self) -> BigInt {
        self.coeffs[0].clone()
    }

    /// Exact value at an integer point.
    pub fn eval_integer(&self, x: i64) -> BigInt {
        let x = BigInt::from(x);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
    }

    /// Floating-point value through the three-term recurrence, which stays
    /// accurate where the monomial form cancels catastrophically.
    pub fn eval(&self, eta: f64) -> f64 {
        hermite_value(self.degree, eta)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// `H_n` with exact coefficients.
pub fn hermite(n: usize) -> HermitePoly {
    let mut h = HermitePoly::one();
    for _ in 0..n {
        h = h.raise();
    }
    h
}

/// `H_n(eta)` via `H_{n+1} = eta H_n - 2 n H_{n-1}`.
pub fn hermite_value(n: usize, eta: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = eta;
    for m in 1..n {
        let h2 = eta * h1 - 2.0 * m as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Values `H_0(eta) .. H_n(eta)`.
pub fn hermite_values(n: usize, eta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(eta);
    }
    for m in 1..n {
        let next = eta * out[m] - 2.0 * m as f64 * out[m - 1];
        out.push(next);
    }
    out
}

/// `H_{2k}(0) = (-1)^k 2^k (2k-1)!!` in exact arithmetic.
pub fn hermite_even_at_zero(k: usize) -> BigInt {
    let mut v = BigInt::from(1);
    for j in 1..=k {
        v *= BigInt::from(2 * (2 * j - 1));
    }
    if k % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// A function on the half-line, either sampled on the basis grid or given by
/// eigen-coefficients `c_k` of `sum c_k phi_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum HalfLineFunction {
    Grid { eta_max: f64, values: Vec<f64> },
    Eigen { coeffs: Vec<f64> },
}

impl HalfLineFunction {
    pub fn eigen(coeffs: Vec<f64>) -> Self {
        HalfLineFunction::Eigen { coeffs }
    }
}

/// Half-line Hermite eigen-system with its quadrature grid.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub order: usize,
    pub eta_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    diff: DMatrix<f64>,
    /// `phi_k` sampled on the nodes, one row per mode.
    pub phi: Vec<Vec<f64>>,
    /// `psi_k` sampled on the nodes.
    pub psi: Vec<Vec<f64>>,
}

/// Solvability tolerance used by [`SpectralBasis::dirichlet_solve`].
pub const DEFAULT_SOLVABILITY_TOL: f64 = 1e-6;

impl SpectralBasis {
    /// Build `K` modes on `[0, eta_max]` with `n_quad + 1` Lobatto nodes and
    /// verify biorthogonality to `1e-10` relative to `max(1, sup |phi_i|)`
    /// (the high modes carry large prefactors, so rounding scales with them).
    pub fn build(order: usize, eta_max: f64, n_quad: usize) -> Result<Self, SpectralError> {
        if order < 2 {
            return Err(SpectralError::InvalidParameter(format!("order {order} < 2")));
        }
        if !((-eta_max * eta_max / 8.0).exp() < 1e-18) {
            return Err(SpectralError::InvalidParameter(format!("eta_max {eta_max} leaves Gaussian tail above 1e-18")));
        }
        if n_quad < 4 * order + 20 {
            return Err(SpectralError::InvalidParameter(format!("n_quad {n_quad} too small for {order} modes")));
        }
        let nodes = cheb_nodes(n_quad, 0.0, eta_max);
        let weights = clenshaw_curtis(n_quad, 0.0, eta_max);
        let diff = cheb_diff(n_quad, 0.0, eta_max);
        let phi = (0..order).map(|k| nodes.iter().map(|&e| phi_value(k, e)).collect()).collect();
        let psi = (0..order).map(|k| nodes.iter().map(|&e| psi_value(k, e)).collect()).collect();
        let basis = SpectralBasis { order, eta_max, nodes, weights, diff, phi, psi };
        for i in 0..order {
            let scale = basis.phi[i].iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for j in 0..order {
                let v = basis.dot(&basis.phi[i], &basis.psi[j]);
                let err = (v - if i == j { 1.0 } else { 0.0 }).abs();
                if err > 1e-10 * scale {
                    return Err(SpectralError::Biorthogonality { i, j, error: err });
                }
            }
        }
        Ok(basis)
    }

    /// Default resolution: 12 modes, `eta_max = 19`, 200 Lobatto panels.
    pub fn standard() -> Self {
        SpectralBasis::build(12, 19.0, 200).expect("standard basis is well resolved")
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Worst entry of `|<phi_i, psi_j> - delta_ij|` over `i, j < m` as (i, j, error).
    pub fn biorthogonality_error(&self, m: usize) -> (usize, usize, f64) {
        let mut worst = (0, 0, 0.0);
        for i in 0..m.min(self.order) {
            for j in 0..m.min(self.order) {
                let v = self.dot(&self.phi[i], &self.psi[j]);
                let e = (v - if i == j { 1.0 } else { 0.0 }).abs();
                if e > worst.2 {
                    worst = (i, j, e);
                }
            }
        }
        worst
    }

    /// `sup |L phi_k - k phi_k|` over the nodes, with derivatives taken from
    /// the exact Hermite recurrence.
    pub fn eigen_residual(&self, k: usize) -> f64 {
        self.nodes
            .iter()
            .map(|&e| {
                let d1 = phi_derivative(k, 1, e);
                let d2 = phi_derivative(k, 2, e);
                let v = phi_value(k, e);
                (-d2 - 0.5 * e * d1 - v - k as f64 * v).abs()
            })
            .fold(0.0, f64::max)
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    /// Grid samples of a function given in either representation.
    pub fn to_grid(&self, f: &HalfLineFunction) -> Result<Vec<f64>, SpectralError> {
        match f {
            HalfLineFunction::Grid { eta_max, values } => {
                if values.len() != self.n_nodes() || (eta_max - self.eta_max).abs() > 0.0 {
                    return Err(SpectralError::DomainMismatch {
                        expected: self.n_nodes(),
                        expected_max: self.eta_max,
                        found: values.len(),
                        found_max: *eta_max,
                    });
                }
                Ok(values.clone())
            }
            HalfLineFunction::Eigen { coeffs } => {
                let mut out = vec![0.0; self.n_nodes()];
                for (k, c) in coeffs.iter().enumerate() {
                    if *c == 0.0 {
                        continue;
                    }
                    let row: Vec<f64> = if k < self.order {
                        self.phi[k].clone()
                    } else {
                        self.nodes.iter().map(|&e| phi_value(k, e)).collect()
                    };
                    for (o, p) in out.iter_mut().zip(row) {
                        *o += c * p;
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn grid(&self, values: Vec<f64>) -> HalfLineFunction {
        HalfLineFunction::Grid { eta_max: self.eta_max, values }
    }

    /// Sample an arbitrary closure on the basis grid.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> HalfLineFunction {
        self.grid(self.nodes.iter().map(|&e| f(e)).collect())
    }

    pub fn phi_fn(&self, k: usize) -> HalfLineFunction {
        self.grid(self.nodes.iter().map(|&e| phi_value(k, e)).collect())
    }

    pub fn psi_fn(&self, k: usize) -> HalfLineFunction {
        self.grid(self.nodes.iter().map(|&e| psi_value(k, e)).collect())
    }

    /// `int_0^inf f g`.
    pub fn inner_product(&self, f: &HalfLineFunction, g: &HalfLineFunction) -> Result<f64, SpectralError> {
        Ok(self.dot(&self.to_grid(f)?, &self.to_grid(g)?))
    }

    /// `<f, psi_k>` for `k < K`.
    pub fn project(&self, f: &HalfLineFunction) -> Result<Vec<f64>, SpectralError> {
        let v = self.to_grid(f)?;
        Ok(self.psi.iter().map(|p| self.dot(&v, p)).collect())
    }

    pub fn projection_onto(&self, f: &HalfLineFunction, k: usize) -> Result<f64, SpectralError> {
        let v = self.to_grid(f)?;
        let p: Vec<f64> = self.nodes.iter().map(|&e| psi_value(k, e)).collect();
        Ok(self.dot(&v, &p))
    }

    /// Collocation derivative.
    pub fn derivative(&self, f: &HalfLineFunction) -> Result<HalfLineFunction, SpectralError> {
        let v = DVector::from_vec(self.to_grid(f)?);
        Ok(self.grid((&self.diff * v).iter().copied().collect()))
    }

    /// `d^n f / d eta^n` at `eta = 0`.
    pub fn boundary_derivative(&self, f: &HalfLineFunction, n: usize) -> Result<f64, SpectralError> {
        let mut v = DVector::from_vec(self.to_grid(f)?);
        for _ in 0..n {
            v = &self.diff * v;
        }
        Ok(v[0])
    }

    /// Value at an arbitrary point of `[0, eta_max]` (zero beyond).
    pub fn value_at(&self, f: &HalfLineFunction, eta: f64) -> Result<f64, SpectralError> {
        if let HalfLineFunction::Eigen { coeffs } = f {
            return Ok(coeffs.iter().enumerate().map(|(k, c)| c * phi_value(k, eta)).sum());
        }
        if eta >= self.eta_max {
            return Ok(0.0);
        }
        Ok(cheb_interp(&self.nodes, &self.to_grid(f)?, eta))
    }

    /// Apply `L - lambda` on the grid.
    pub fn apply(&self, lambda: f64, f: &HalfLineFunction) -> Result<HalfLineFunction, SpectralError> {
        let v = DVector::from_vec(self.to_grid(f)?);
        let d1 = &self.diff * &v;
        let d2 = &self.diff * &d1;
        let out = (0..self.n_nodes())
            .map(|i| -d2[i] - 0.5 * self.nodes[i] * d1[i] - (1.0 + lambda) * v[i])
            .collect();
        Ok(self.grid(out))
    }

    /// Solve `(L - lambda) V = f`, `V(0) = V(eta_max) = 0`, by collocation.
    /// For integer `lambda = k` the `phi_k` component is removed and the
    /// solvability projection `<f, psi_k>` must be below `tol`.
    pub fn dirichlet_solve_tol(&self, lambda: f64, f: &HalfLineFunction, tol: f64) -> Result<HalfLineFunction, SpectralError> {
        let rhs = self.to_grid(f)?;
        let n = self.n_nodes();
        let resonant = resonant_mode(lambda);
        let size = if resonant.is_some() { n + 1 } else { n };
        let d2 = &self.diff * &self.diff;
        let mut a = DMatrix::<f64>::zeros(size, size);
        let mut b = DVector::<f64>::zeros(size);
        for i in 1..n - 1 {
            for j in 0..n {
                a[(i, j)] = -d2[(i, j)] - 0.5 * self.nodes[i] * self.diff[(i, j)];
            }
            a[(i, i)] -= 1.0 + lambda;
            b[i] = rhs[i];
        }
        a[(0, 0)] = 1.0;
        a[(n - 1, n - 1)] = 1.0;
        if let Some(k) = resonant {
            let proj = self.projection_onto(f, k)?;
            if proj.abs() > tol {
                return Err(SpectralError::SolvabilityViolation { k, projection: proj, tolerance: tol });
            }
            let psi_k: Vec<f64> = self.nodes.iter().map(|&e| psi_value(k, e)).collect();
            for i in 1..n - 1 {
                a[(i, n)] = phi_value(k, self.nodes[i]);
            }
            for j in 0..n {
                a[(n, j)] = self.weights[j] * psi_k[j];
            }
        }
        let lu = a.lu();
        let sol = lu.solve(&b).ok_or(SpectralError::Singular)?;
        Ok(self.grid(sol.iter().take(n).copied().collect()))
    }

    pub fn dirichlet_solve(&self, lambda: f64, f: &HalfLineFunction) -> Result<HalfLineFunction, SpectralError> {
        self.dirichlet_solve_tol(lambda, f, DEFAULT_SOLVABILITY_TOL)
    }

    /// Truncated eigen-expansion `sum_k <f, psi_k>/(k - lambda) phi_k`.
    pub fn dirichlet_solve_eigen(&self, lambda: f64, f: &HalfLineFunction, tol: f64) -> Result<HalfLineFunction, SpectralError> {
        let proj = self.project(f)?;
        let resonant = resonant_mode(lambda);
        let mut coeffs = vec![0.0; self.order];
        for (k, p) in proj.iter().enumerate() {
            if Some(k) == resonant {
                if p.abs() > tol {
                    return Err(SpectralError::SolvabilityViolation { k, projection: *p, tolerance: tol });
                }
                continue;
            }
            coeffs[k] = p / (k as f64 - lambda);
        }
        Ok(HalfLineFunction::Eigen { coeffs })
    }

    /// Plain `L^2(0, eta_max)` distance between two functions.
    pub fn l2_distance(&self, f: &HalfLineFunction, g: &HalfLineFunction) -> Result<f64, SpectralError> {
        let a = self.to_grid(f)?;
        let b = self.to_grid(g)?;
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        Ok(self.dot(&d, &d).sqrt())
    }
}

fn resonant_mode(lambda: f64) -> Option<usize> {
    let r = lambda.round();
    if r >= 0.0 && (lambda - r).abs() < 1e-12 {
        Some(r as usize)
    } else {
        None
    }
}

/// `phi_k(eta)`.
pub fn phi_value(k: usize, eta: f64) -> f64 {
    phi_derivative(k, 0, eta)
}

/// `d^n phi_k / d eta^n`, using `d (H_m g) = -H_{m+1} g / 2` for the Gaussian `g`.
pub fn phi_derivative(k: usize, n: usize, eta: f64) -> f64 {
    let m = 2 * k + 1 + n;
    let h = hermite_value(m, eta);
    0.25f64.powi(k as i32) * (-0.5f64).powi(n as i32) * h * (-eta * eta / 4.0).exp()
}

/// `psi_k(eta)`.
pub fn psi_value(k: usize, eta: f64) -> f64 {
    hermite_value(2 * k + 1, eta) / (2.0 * std::f64::consts::PI.sqrt() * factorial(2 * k + 1))
}

/// `phi_k'(0) = 4^-k (2k+1) H_{2k}(0)`.
pub fn phi_slope_at_zero(k: usize) -> f64 {
    0.25f64.powi(k as i32) * (2 * k + 1) as f64 * hermite_even_at_zero(k).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_hermite_polynomials() {
        assert_eq!(hermite(1).coeffs, vec![BigInt::from(0), BigInt::from(1)]);
        assert_eq!(hermite(2).coeffs, vec![BigInt::from(-2), BigInt::from(0), BigInt::from(1)]);
        assert_eq!(hermite(4).value_at_zero(), BigInt::from(12));
    }

    #[test]
    fn derivative_lowers_degree() {
        for n in 1..30 {
            assert_eq!(hermite(n).derivative(), hermite(n - 1).scale(n as i64));
        }
    }

    #[test]
    fn recurrence_matches_exact_integers() {
        for n in 0..25 {
            let h = hermite(n);
            for x in -3..=3 {
                let exact = h.eval_integer(x).to_f64().unwrap();
                let approx = hermite_value(n, x as f64);
                assert!((exact - approx).abs() <= 1e-12 * exact.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn phi_zero_at_one() {
        assert!((phi_value(0, 1.0) - (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn slopes_at_origin() {
        assert_eq!(phi_slope_at_zero(0), 1.0);
        assert_eq!(phi_slope_at_zero(1), -1.5);
        for k in 0..6 {
            assert!((phi_derivative(k, 1, 0.0) - phi_slope_at_zero(k)).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_next_is_second_derivative() {
        for k in 0..6 {
            for &e in &[0.3, 1.7, 4.0] {
                let a = phi_value(k + 1, e);
                let b = phi_derivative(k, 2, e);
                assert!((a - b).abs() < 1e-13 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralBasis::build(1, 19.0, 200).is_err());
        assert!(SpectralBasis::build(4, 10.0, 200).is_err());
    }

    #[test]
    fn eigenfunction_input_divides_by_gap() {
        let b = SpectralBasis::standard();
        let v = b.dirichlet_solve(0.5, &b.phi_fn(2)).unwrap();
        let expected = b.phi_fn(2);
        let d = b.l2_distance(&v, &expected).unwrap();
        let scaled = b.l2_distance(&b.grid(b.to_grid(&v).unwrap().iter().map(|x| x * 1.5).collect()), &expected).unwrap();
        assert!(scaled < 1e-10, "{scaled} (unscaled distance {d})");
    }

    #[test]
    fn resonance_checks() {
        let b = SpectralBasis::standard();
        let v = b.dirichlet_solve(1.0, &b.phi_fn(0)).unwrap();
        let c = b.to_grid(&v).unwrap();
        let want: Vec<f64> = b.to_grid(&b.phi_fn(0)).unwrap().iter().map(|x| -x).collect();
        let err = c.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!(matches!(b.dirichlet_solve(1.0, &b.phi_fn(1)), Err(SpectralError::SolvabilityViolation { k: 1, .. })));
    }

    #[test]
    fn grid_size_mismatch_is_reported() {
        let b = SpectralBasis::standard();
        let f = HalfLineFunction::Grid { eta_max: 19.0, values: vec![0.0; 10] };
        assert!(matches!(b.inner_product(&f, &f), Err(SpectralError::DomainMismatch { .. })));
    }
}
