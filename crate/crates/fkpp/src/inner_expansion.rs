//! First inner correction `V1-`, solving
//! `-V'' + 2 e^{-x} V0- V = (3/2)(V0- - V0-')`
//! with `V = O(e^x)` on the left and `V = -y^3/4 + 3y^2/4 + C1- y + o(1)` on
//! the right, where `y = x + k` is the matching coordinate of the front.
//!
//! The particular solution is integrated in the same RK4 sweep as the front,
//! starting from zero data far left (the decaying mode is the only one
//! excited). The constant term of the cubic tail is then removed with the
//! homogeneous solution `V° = e^x phi'`, which behaves like `1 - y`.

use thiserror::Error;

use crate::numerics::{hermite_uniform, least_squares};
use crate::traveling_wave::{central_derivative, sweep, WaveError, WaveProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InnerError {
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error("tail fit is singular (condition {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("profile window [{x_lo}, {x_hi}] does not cover [-20, 30]")]
    WindowTooSmall { x_lo: f64, x_hi: f64 },
    #[error("shift {zeta} out of range (|zeta| < 1 required)")]
    ShiftOutOfRange { zeta: f64 },
    #[error("evaluation point {x} lies outside the stored window")]
    OutsideWindow { x: f64 },
}

/// `V1-` on the wave grid with its fitted tail.
#[derive(Debug, Clone)]
pub struct InnerTerm {
    pub wave: WaveProfile,
    pub v1: Vec<f64>,
    pub dv1: Vec<f64>,
    /// Tail `(p3, p2, p1, p0)` in powers of `y = x + k`.
    pub tail: [f64; 4],
    pub c1_minus: f64,
    /// Multiple of `V°` removed from the raw particular solution.
    pub c0_removed: f64,
    /// Fit window in `x`.
    pub window: (f64, f64),
    pub fit_condition: f64,
}

/// `V° = e^x phi' = V0' - V0` and its derivative at grid point `i`.
fn homogeneous_at(w: &WaveProfile, i: usize) -> (f64, f64) {
    let x = w.x(i);
    let d2 = (-x).exp() * w.v[i] * w.v[i];
    (w.dv[i] - w.v[i], d2 - w.dv[i])
}

/// Least-squares fit of `{y^3, y^2, y, 1}` over `x in window`.
pub fn fit_tail(w: &WaveProfile, f: &[f64], window: (f64, f64)) -> Result<([f64; 4], f64), InnerError> {
    let mut cols = vec![Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut ys = Vec::new();
    for i in 0..w.len() {
        let x = w.x(i);
        if x >= window.0 && x <= window.1 {
            let y = x + w.k;
            cols[0].push(y * y * y);
            cols[1].push(y * y);
            cols[2].push(y);
            cols[3].push(1.0);
            ys.push(f[i]);
        }
    }
    if ys.len() < 8 {
        return Err(InnerError::SingularSystem { condition: f64::INFINITY });
    }
    let fit = least_squares(&cols, &ys);
    if !(fit.condition < 1e12) {
        return Err(InnerError::SingularSystem { condition: fit.condition });
    }
    Ok(([fit.coeffs[0], fit.coeffs[1], fit.coeffs[2], fit.coeffs[3]], fit.condition))
}

/// Default tail window: `[max(15, x_hi - 15), x_hi - 5]`.
pub fn default_window(w: &WaveProfile) -> (f64, f64) {
    let hi = w.x_hi() - 5.0;
    ((w.x_hi() - 15.0).max(15.0), hi)
}

/// Normalized samples, derivatives, removed multiple, tail and fit condition.
pub type Gauged = (Vec<f64>, Vec<f64>, f64, [f64; 4], f64);

/// Remove the constant tail term of a candidate solution with `V°`.
pub fn normalize_gauge(w: &WaveProfile, v: &[f64], dv: &[f64], window: (f64, f64)) -> Result<Gauged, InnerError> {
    let (raw, _) = fit_tail(w, v, window)?;
    // V° = 1 - y + o(1), so subtracting c0 V° clears the constant term.
    let c0 = raw[3];
    let mut out = v.to_vec();
    let mut dout = dv.to_vec();
    for i in 0..w.len() {
        let (h, dh) = homogeneous_at(w, i);
        out[i] -= c0 * h;
        dout[i] -= c0 * dh;
    }
    let (tail, cond) = fit_tail(w, &out, window)?;
    Ok((out, dout, c0, tail, cond))
}

/// Solve for `V1-` on the wave's grid.
pub fn solve_inner(profile: &WaveProfile) -> Result<InnerTerm, InnerError> {
    solve_inner_window(profile, default_window(profile))
}

/// [`solve_inner`] with an explicit tail-fit window.
pub fn solve_inner_window(profile: &WaveProfile, window: (f64, f64)) -> Result<InnerTerm, InnerError> {
    if profile.x_lo > -20.0 || profile.x_hi() < 30.0 {
        return Err(InnerError::WindowTooSmall { x_lo: profile.x_lo, x_hi: profile.x_hi() });
    }
    let rhs = |x: f64, v0: f64, dv0: f64, s: &[f64], out: &mut [f64]| {
        out[0] = s[1];
        out[1] = 2.0 * (-x).exp() * v0 * s[0] - 1.5 * (v0 - dv0);
    };
    let (_, _, ex) = sweep(profile.x_lo, profile.h, profile.len(), profile.amplitude, &[0.0, 0.0], Some(&rhs));
    let raw: Vec<f64> = ex.iter().map(|s| s[0]).collect();
    let draw: Vec<f64> = ex.iter().map(|s| s[1]).collect();
    let (v1, dv1, c0, tail, cond) = normalize_gauge(profile, &raw, &draw, window)?;
    Ok(InnerTerm { wave: profile.clone(), v1, dv1, c1_minus: tail[2], tail, c0_removed: c0, window, fit_condition: cond })
}

impl InnerTerm {
    fn d2v1_at(&self, i: usize) -> f64 {
        let w = &self.wave;
        let x = w.x(i);
        2.0 * (-x).exp() * w.v[i] * self.v1[i] - 1.5 * (w.v[i] - w.dv[i])
    }

    fn in_window(&self, x: f64) -> bool {
        x >= self.wave.x_lo && x <= self.wave.x_hi()
    }

    /// `(V1-, V1-')` at `x`; outside the grid the tail asymptotics are used.
    pub fn v1(&self, x: f64) -> (f64, f64) {
        let w = &self.wave;
        if x > w.x_hi() {
            let y = x + w.k;
            let [p3, p2, p1, p0] = self.tail;
            return (((p3 * y + p2) * y + p1) * y + p0, (3.0 * p3 * y + 2.0 * p2) * y + p1);
        }
        if x < w.x_lo {
            return (0.0, 0.0);
        }
        let v = hermite_uniform(w.x_lo, w.h, &self.v1, &self.dv1, x).unwrap_or(0.0);
        let s = (x - w.x_lo) / w.h;
        let i = (s.floor().max(0.0) as usize).min(w.len() - 2);
        let t = s - i as f64;
        let dv = crate::numerics::hermite_cubic(self.dv1[i], self.dv1[i + 1], w.h * self.d2v1_at(i), w.h * self.d2v1_at(i + 1), t);
        (v, dv)
    }

    /// `V1-` in the matching coordinate `y = x + k`.
    pub fn v1_matched(&self, y: f64) -> (f64, f64) {
        self.v1(y - self.wave.k)
    }

    /// `psi = e^{-x} V1-` at `x`.
    pub fn psi(&self, x: f64) -> f64 {
        (-x).exp() * self.v1(x).0
    }

    pub fn psi_samples(&self) -> Vec<f64> {
        (0..self.v1.len()).map(|i| (-self.wave.x(i)).exp() * self.v1[i]).collect()
    }

    pub fn dpsi_samples(&self) -> Vec<f64> {
        (0..self.v1.len()).map(|i| (-self.wave.x(i)).exp() * (self.dv1[i] - self.v1[i])).collect()
    }

    /// `max |-(V1-)'' + 2 e^{-x} V0- V1- - (3/2)(V0- - V0-')|` over interior
    /// grid points in `[a, b]`, with `V1''` from differences of `V1'`.
    pub fn ode_residual(&self, a: f64, b: f64) -> f64 {
        let w = &self.wave;
        let d2 = central_derivative(&self.dv1, w.h);
        self.interior(a, b)
            .map(|i| (-d2[i] + 2.0 * (-w.x(i)).exp() * w.v[i] * self.v1[i] - 1.5 * (w.v[i] - w.dv[i])).abs())
            .fold(0.0, f64::max)
    }

    /// Residual of `-V°'' + 2 e^{-x} V0- V° = 0` on `[a, b]`.
    pub fn homogeneous_residual(&self, a: f64, b: f64) -> f64 {
        let w = &self.wave;
        let (h, dh): (Vec<f64>, Vec<f64>) = (0..w.len()).map(|i| homogeneous_at(w, i)).unzip();
        let d2 = central_derivative(&dh, w.h);
        self.interior(a, b)
            .map(|i| (-d2[i] + 2.0 * (-w.x(i)).exp() * w.v[i] * h[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Residual of `psi'' + 2 psi' + (1 - 2 c(x)) psi - (3/2) phi'` on `[a, b]`,
    /// where the potential coefficient `c` is supplied (`phi` is the
    /// consistent choice).
    pub fn psi_residual_with<F: Fn(f64, f64) -> f64>(&self, a: f64, b: f64, coefficient: F) -> f64 {
        let w = &self.wave;
        let psi = self.psi_samples();
        let dpsi = self.dpsi_samples();
        let d2 = central_derivative(&dpsi, w.h);
        self.interior(a, b)
            .map(|i| {
                let x = w.x(i);
                let phi = w.phi_at(i);
                (d2[i] + 2.0 * dpsi[i] + (1.0 - 2.0 * coefficient(x, phi)) * psi[i] - 1.5 * w.dphi_at(i)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Residual of the `psi` equation with potential `1 - 2 phi`.
    pub fn psi_residual(&self, a: f64, b: f64) -> f64 {
        self.psi_residual_with(a, b, |_, phi| phi)
    }

    fn interior(&self, a: f64, b: f64) -> impl Iterator<Item = usize> + '_ {
        let n = self.v1.len();
        (3..n - 3).filter(move |&i| {
            let x = self.wave.x(i);
            x >= a && x <= b
        })
    }

    /// `V0-(x + zeta) + V1-(x + zeta) / t` at each of `xs`.
    pub fn shifted_inner(&self, zeta: f64, t: f64, xs: &[f64]) -> Result<Vec<f64>, InnerError> {
        if !(zeta.abs() < 1.0) {
            return Err(InnerError::ShiftOutOfRange { zeta });
        }
        xs.iter()
            .map(|&x| {
                let s = x + zeta;
                if !self.in_window(s) {
                    return Err(InnerError::OutsideWindow { x: s });
                }
                Ok(self.wave.v0(s).0 + self.v1(s).0 / t)
            })
            .collect()
    }
}

/// Picard iteration for `V'' - 2V = -(2 - 2 phi) V + (3/2) e^x phi'` as a
/// Volterra equation from the far left, on `x <= x_delta` where
/// `1 - phi(x_delta) = delta`. Returns `(x, V)` samples.
///
/// This is the constructive left-half-line scheme used to establish
/// existence; it fixes `V1-` only up to a multiple of `V°`.
pub fn left_iteration(profile: &WaveProfile, delta: f64, h: f64) -> Vec<(f64, f64)> {
    let x_delta = profile.inverse(1.0 - delta).unwrap_or(0.0);
    let x0 = profile.x_lo;
    let n = ((x_delta - x0) / h).floor() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| x0 + i as f64 * h).collect();
    let f: Vec<f64> = xs.iter().map(|&x| 2.0 - 2.0 * profile.phi(x)).collect();
    let g: Vec<f64> = xs.iter().map(|&x| 1.5 * x.exp() * profile.dphi(x)).collect();
    let r2 = std::f64::consts::SQRT_2;
    let kernel = |r: f64| (r2 * r).sinh() / r2;
    let mut v = vec![0.0; n];
    for _ in 0..200 {
        let src: Vec<f64> = (0..n).map(|j| -f[j] * v[j] + g[j]).collect();
        let mut next = vec![0.0; n];
        for i in 1..n {
            let mut acc = 0.5 * kernel(xs[i] - xs[0]) * src[0];
            for j in 1..i {
                acc += kernel(xs[i] - xs[j]) * src[j];
            }
            next[i] = acc * h;
        }
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = next.iter().map(|a| a.abs()).fold(0.0, f64::max);
        v = next;
        if change <= 1e-13 * scale.max(1e-300) {
            break;
        }
    }
    xs.into_iter().zip(v).collect()
}

/// Distance between the left iteration and `V1-` modulo `V°`, relative to
/// `max |V1-|` on the iteration's domain.
pub fn compare_with_left_iteration(inner: &InnerTerm, samples: &[(f64, f64)]) -> f64 {
    let w = &inner.wave;
    let hom: Vec<f64> = samples.iter().map(|&(x, _)| x.exp() * w.dphi(x)).collect();
    let diff: Vec<f64> = samples.iter().map(|&(x, v)| v - inner.v1(x).0).collect();
    let fit = least_squares(std::slice::from_ref(&hom), &diff);
    let c = fit.coeffs[0];
    let err = diff.iter().zip(&hom).map(|(d, h)| (d - c * h).abs()).fold(0.0, f64::max);
    let scale = samples.iter().map(|&(x, _)| inner.v1(x).0.abs()).fold(0.0, f64::max);
    err / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traveling_wave::solve_wave;

    #[test]
    fn rejects_short_window() {
        let mut w = solve_wave(-25.0, 40.0, 0.01).unwrap();
        w.x_lo = -10.0;
        assert!(matches!(solve_inner(&w), Err(InnerError::WindowTooSmall { .. })));
    }

    #[test]
    fn shift_bounds() {
        let w = solve_wave(-25.0, 40.0, 0.01).unwrap();
        let inner = solve_inner(&w).unwrap();
        assert!(matches!(inner.shifted_inner(1.5, 10.0, &[0.0]), Err(InnerError::ShiftOutOfRange { .. })));
        assert!(matches!(inner.shifted_inner(0.5, 10.0, &[39.9]), Err(InnerError::OutsideWindow { .. })));
    }
}
