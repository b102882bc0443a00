//! The minimal-speed front `phi'' + 2 phi' + phi - phi^2 = 0`, `phi(-inf) = 1`,
//! `phi(+inf) = 0`, in the translate with `phi(s) = (s + k) e^{-s} + ...`.
//!
//! The profile is integrated in the variable `V = e^x phi`, which solves
//! `V'' = e^{-x} V^2`, starting from the left-tail expansion
//! `phi = 1 - A e^{lx} + b A^2 e^{2lx}` with `l = sqrt(2) - 1`. The translate
//! is then fixed by demanding unit slope of `V` at the right end; the
//! intercept `k` is a property of the front and is reported, not chosen.

use thiserror::Error;

use crate::numerics::{hermite_uniform, least_squares};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error("translate normalization did not converge: slope {slope} after {iterations} iterations")]
    NonConvergence { slope: f64, iterations: usize },
    #[error("invalid wave window: {0}")]
    InvalidWindow(String),
}

/// Left-tail exponent `sqrt(2) - 1`.
pub fn left_rate() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

/// Second-order coefficient `b` in `1 - phi = A e^{lx} - b A^2 e^{2lx}`.
fn left_second_order() -> f64 {
    let l = left_rate();
    1.0 / (4.0 * l * l + 4.0 * l - 1.0)
}

/// Sampled front on a uniform grid, with `V = e^x phi` and `V'`.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub x_lo: f64,
    pub h: f64,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    /// Left-tail amplitude `A`.
    pub amplitude: f64,
    /// Intercept in `e^x phi(x) = x + k + ...`.
    pub k: f64,
    /// Fitted decay rate of `e^x phi - (x + k)`.
    pub omega: f64,
}

/// Right-hand side of a system integrated alongside the front: receives
/// `(x, V0, V0', state)` and writes the derivative of `state`.
pub type Coupled<'a> = &'a dyn Fn(f64, f64, f64, &[f64], &mut [f64]);

/// RK4 sweep of `V'' = e^{-x} V^2` from the left-tail data with amplitude
/// `a`, optionally carrying a linear system along. Returns `(V, V', extra)`
/// samples at every grid point.
pub fn sweep(x_lo: f64, h: f64, n: usize, a: f64, extra0: &[f64], coupled: Option<Coupled>) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let l = left_rate();
    let b = left_second_order();
    let e1 = a * (l * x_lo).exp();
    let w = e1 - b * e1 * e1;
    let dw = l * e1 - 2.0 * l * b * e1 * e1;
    let phi = 1.0 - w;
    let dphi = -dw;
    let m = extra0.len();
    let mut y = vec![0.0; 2 + m];
    y[0] = x_lo.exp() * phi;
    y[1] = x_lo.exp() * (phi + dphi);
    y[2..].copy_from_slice(extra0);
    let f = |x: f64, s: &[f64], out: &mut [f64]| {
        out[0] = s[1];
        out[1] = (-x).exp() * s[0] * s[0];
        if let Some(c) = coupled {
            c(x, s[0], s[1], &s[2..], &mut out[2..]);
        }
    };
    let mut v = Vec::with_capacity(n);
    let mut dv = Vec::with_capacity(n);
    let mut ex = Vec::with_capacity(n);
    let dim = 2 + m;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for i in 0..n {
        v.push(y[0]);
        dv.push(y[1]);
        ex.push(y[2..].to_vec());
        if i + 1 == n {
            break;
        }
        let x = x_lo + i as f64 * h;
        f(x, &y, &mut k1);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        f(x + 0.5 * h, &tmp, &mut k2);
        for j in 0..dim {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        f(x + 0.5 * h, &tmp, &mut k3);
        for j in 0..dim {
            tmp[j] = y[j] + h * k3[j];
        }
        f(x + h, &tmp, &mut k4);
        for j in 0..dim {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    (v, dv, ex)
}

/// Integrate the front on `[x_lo, x_hi]` with spacing `h` and normalize the
/// translate to unit slope of `e^x phi` at the right end.
pub fn solve_wave(x_lo: f64, x_hi: f64, h: f64) -> Result<WaveProfile, WaveError> {
    if x_lo > -20.0 || x_hi < 30.0 || !(h > 0.0 && h <= 0.01) {
        return Err(WaveError::InvalidWindow(format!("need x_lo <= -20, x_hi >= 30, 0 < h <= 0.01; got [{x_lo}, {x_hi}], h = {h}")));
    }
    let n = ((x_hi - x_lo) / h).round() as usize + 1;
    let l = left_rate();
    let max_iter = 30;
    // Secant iteration on ln(slope) as a function of ln(A); the continuum
    // translate invariance gives d ln(slope) / d ln(A) = -1/l as first guess.
    let mut la = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    let mut best = (f64::INFINITY, 0.0, f64::NAN);
    for it in 0..max_iter {
        let a = la.exp();
        let (v, dv, _) = sweep(x_lo, h, n, a, &[], None);
        let slope = dv[n - 1];
        if !(slope.is_finite() && slope > 0.0) {
            return Err(WaveError::NonConvergence { slope, iterations: it + 1 });
        }
        let g = slope.ln();
        if g.abs() < best.0 {
            best = (g.abs(), la, slope);
        }
        // The left-tail perturbation is ~1e-5 of V at x_lo, so ln(slope)
        // carries a roundoff floor near 1e-11.
        if g.abs() < 1e-9 {
            let x_end = x_lo + (n - 1) as f64 * h;
            let k = v[n - 1] - x_end * dv[n - 1];
            let mut p = WaveProfile { x_lo, h, v, dv, amplitude: a, k, omega: 0.0 };
            p.omega = p.fit_omega();
            return Ok(p);
        }
        let slope_of_g = match prev {
            Some((lp, gp)) if (g - gp).abs() > 0.0 && (la - lp).abs() > 0.0 => (g - gp) / (la - lp),
            _ => -1.0 / l,
        };
        prev = Some((la, g));
        la -= g / slope_of_g;
    }
    Err(WaveError::NonConvergence { slope: best.2, iterations: max_iter })
}

/// Default window `[-30, 50]` with `h = 0.005`.
pub fn standard_wave() -> WaveProfile {
    solve_wave(-30.0, 50.0, 0.005).expect("default wave window converges")
}

impl WaveProfile {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn x_hi(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// `phi` at grid point `i`.
    pub fn phi_at(&self, i: usize) -> f64 {
        (-self.x(i)).exp() * self.v[i]
    }

    pub fn dphi_at(&self, i: usize) -> f64 {
        (-self.x(i)).exp() * (self.dv[i] - self.v[i])
    }

    pub fn phi_samples(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.phi_at(i)).collect()
    }

    pub fn dphi_samples(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.dphi_at(i)).collect()
    }

    /// `V0 = e^x phi` and its derivative anywhere on the line; beyond the
    /// grid the tail asymptotics are used.
    pub fn v0(&self, x: f64) -> (f64, f64) {
        if x < self.x_lo {
            let l = left_rate();
            let e = self.amplitude * (l * x).exp();
            let phi = 1.0 - e;
            return (x.exp() * phi, x.exp() * (phi - l * e));
        }
        if x > self.x_hi() {
            return (x + self.k, 1.0);
        }
        let v = hermite_uniform(self.x_lo, self.h, &self.v, &self.dv, x).unwrap_or(x + self.k);
        let dv = self.dv_interp(x);
        (v, dv)
    }

    fn dv_interp(&self, x: f64) -> f64 {
        // V'' = e^{-x} V^2 supplies the slopes for Hermite interpolation of V'.
        let s = (x - self.x_lo) / self.h;
        let n = self.len();
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        let t = s - i as f64;
        let x0 = self.x(i);
        let x1 = self.x(i + 1);
        let m0 = (-x0).exp() * self.v[i] * self.v[i];
        let m1 = (-x1).exp() * self.v[i + 1] * self.v[i + 1];
        crate::numerics::hermite_cubic(self.dv[i], self.dv[i + 1], self.h * m0, self.h * m1, t)
    }

    /// `phi(x)` anywhere on the line.
    pub fn phi(&self, x: f64) -> f64 {
        if x > self.x_hi() {
            return (x + self.k) * (-x).exp();
        }
        let (v, _) = self.v0(x);
        (-x).exp() * v
    }

    /// `phi'(x)` anywhere on the line.
    pub fn dphi(&self, x: f64) -> f64 {
        if x > self.x_hi() {
            return (1.0 - x - self.k) * (-x).exp();
        }
        let (v, dv) = self.v0(x);
        (-x).exp() * (dv - v)
    }

    /// `V0-` in the matching coordinate `y = x + k`, where `V0-(y) = y + o(1)`.
    pub fn v0_matched(&self, y: f64) -> (f64, f64) {
        self.v0(y - self.k)
    }

    /// The `x` with `phi(x) = s`, by bisection on the monotone profile.
    pub fn inverse(&self, s: f64) -> Option<f64> {
        if !(s > 0.0 && s < 1.0) {
            return None;
        }
        let (mut a, mut b) = (self.x_lo - 40.0, self.x_hi() + 40.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.phi(m) > s {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }

    /// `max |phi'' + 2 phi' + phi - phi^2|` on the interior, with `phi''`
    /// from sixth-order differences of the stored `phi'`.
    pub fn ode_residual(&self) -> f64 {
        let dphi = self.dphi_samples();
        let phi = self.phi_samples();
        let d2 = central_derivative(&dphi, self.h);
        (3..self.len() - 3)
            .map(|i| (d2[i] + 2.0 * dphi[i] + phi[i] - phi[i] * phi[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Fitted exponent of `1 - phi ~ A e^{rate x}` over `[x_lo + 1, x_lo + 11]`.
    pub fn left_tail_rate(&self) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..self.len() {
            let x = self.x(i);
            if x >= self.x_lo + 1.0 && x <= self.x_lo + 11.0 {
                xs.push(x);
                ys.push((1.0 - self.phi_at(i)).ln());
            }
        }
        let fit = least_squares(&[vec![1.0; xs.len()], xs], &ys);
        fit.coeffs[1]
    }

    /// Decay rate of `|e^x phi - (x + k)|` fitted on `[8, 20]`.
    fn fit_omega(&self) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..self.len() {
            let x = self.x(i);
            if (8.0..=20.0).contains(&x) {
                let d = (self.v[i] - x - self.k).abs();
                if d > 0.0 {
                    xs.push(x);
                    ys.push(d.ln());
                }
            }
        }
        if xs.len() < 2 {
            return f64::NAN;
        }
        let fit = least_squares(&[vec![1.0; xs.len()], xs], &ys);
        -fit.coeffs[1]
    }
}

/// Sixth-order central first derivative (fourth/second order near the ends).
pub fn central_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for i in 0..n {
        d[i] = if i >= 3 && i + 3 < n {
            (-f[i - 3] + 9.0 * f[i - 2] - 45.0 * f[i - 1] + 45.0 * f[i + 1] - 9.0 * f[i + 2] + f[i + 3]) / (60.0 * h)
        } else if i >= 2 && i + 2 < n {
            (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
        } else if i >= 1 && i + 1 < n {
            (f[i + 1] - f[i - 1]) / (2.0 * h)
        } else if i == 0 {
            (f[1] - f[0]) / h
        } else {
            (f[n - 1] - f[n - 2]) / h
        };
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_windows() {
        assert!(matches!(solve_wave(-10.0, 50.0, 0.005), Err(WaveError::InvalidWindow(_))));
        assert!(matches!(solve_wave(-30.0, 50.0, 0.05), Err(WaveError::InvalidWindow(_))));
    }

    #[test]
    fn unit_slope_on_the_right() {
        let w = solve_wave(-25.0, 40.0, 0.01).unwrap();
        assert!((w.dv[w.len() - 1] - 1.0).abs() < 1e-8);
        assert!(w.phi_at(0) > 1.0 - 1e-4);
    }

    #[test]
    fn central_derivative_of_sine() {
        let h = 0.01;
        let f: Vec<f64> = (0..200).map(|i| (i as f64 * h).sin()).collect();
        let d = central_derivative(&f, h);
        for i in 3..197 {
            assert!((d[i] - (i as f64 * h).cos()).abs() < 1e-12);
        }
    }
}
