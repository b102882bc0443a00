//! Small numerical kernels shared by the modules: adaptive Gauss-Kronrod,
//! Chebyshev-Lobatto tables, compensated sums, interpolation, banded solves
//! and linear least squares.

use nalgebra::{DMatrix, DVector};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive G7K15 quadrature with bisection of the worst panel.
///
/// Stops when the summed error estimate drops below `max(abs_tol, rel_tol*|I|)`
/// or after `max_panels` panels. Returns (value, error estimate).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    let max_panels = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let mut total = KahanSum::default();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total.add(p.2);
            err += p.3;
            if p.3 > panels[worst].3 {
                worst = i;
            }
        }
        let value = total.value();
        if err <= abs_tol.max(rel_tol * value.abs()) || panels.len() >= max_panels {
            return (value, err);
        }
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, m);
        let (v2, e2) = gk15(&f, m, pb);
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Chebyshev-Gauss-Lobatto nodes mapped to [a, b], ordered from a to b.
pub fn cheb_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let s = -(std::f64::consts::PI * j as f64 / n as f64).cos();
            a + 0.5 * (b - a) * (s + 1.0)
        })
        .collect()
}

/// First-derivative collocation matrix on the nodes of [`cheb_nodes`].
pub fn cheb_diff(n: usize, a: f64, b: f64) -> DMatrix<f64> {
    // Standard matrix on s = -cos(pi j / n), built with the negative-sum trick.
    let s: Vec<f64> = (0..=n)
        .map(|j| -(std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let c = |j: usize| -> f64 {
        let e = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            e
        } else {
            -e
        }
    };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (s[i] - s[j]);
            }
        }
    }
    for i in 0..=n {
        let row: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -row;
    }
    d * (2.0 / (b - a))
}

/// Clenshaw-Curtis weights on the nodes of [`cheb_nodes`] over [a, b].
pub fn clenshaw_curtis(n: usize, a: f64, b: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut w = vec![0.0; n + 1];
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = pi * j as f64 / n as f64;
        let mut v = 1.0;
        let half = n / 2;
        for k in 1..=half {
            let bk = if 2 * k == n { 1.0 } else { 2.0 };
            v -= bk * (2.0 * k as f64 * theta).cos() / (4.0 * (k * k) as f64 - 1.0);
        }
        let cj = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = cj * v / n as f64;
    }
    w.iter().map(|x| x * 0.5 * (b - a)).collect()
}

/// Evaluate the polynomial interpolant through Chebyshev-Lobatto samples
/// (barycentric form) at `x`.
pub fn cheb_interp(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..=n {
        let d = x - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        num += w * values[j] / d;
        den += w / d;
    }
    num / den
}

/// Cubic Hermite interpolation from values and slopes on a uniform grid.
pub fn hermite_uniform(x0: f64, h: f64, y: &[f64], dy: &[f64], x: f64) -> Option<f64> {
    let s = (x - x0) / h;
    let n = y.len();
    if !(s >= 0.0) || s > (n - 1) as f64 {
        return None;
    }
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    Some(hermite_cubic(y[i], y[i + 1], h * dy[i], h * dy[i + 1], t))
}

/// Cubic Hermite basis on the unit interval; slopes already scaled by the width.
pub fn hermite_cubic(y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
}

/// Fritsch-Carlson slopes for monotone piecewise-cubic interpolation.
pub fn monotone_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 2 {
        return m;
    }
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

/// Solve a tridiagonal system in place (Thomas algorithm). `a` is the
/// sub-diagonal (a[0] unused), `b` the diagonal, `c` the super-diagonal.
pub fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut beta = b[0];
    d[0] /= beta;
    for i in 1..n {
        cp[i - 1] = c[i - 1] / beta;
        beta = b[i] - a[i] * cp[i - 1];
        d[i] = (d[i] - a[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Banded matrix with `p` sub- and `p` super-diagonals, stored row-wise as
/// `rows[i][p + (j - i)]`. Solved by Gaussian elimination without pivoting,
/// which is adequate for the diagonally dominant systems built here.
#[derive(Debug, Clone)]
pub struct Banded {
    pub p: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Banded {
    pub fn zeros(n: usize, p: usize) -> Self {
        Banded { p, rows: vec![vec![0.0; 2 * p + 1]; n] }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.p;
        self.rows[i][p + j - i] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.p;
        self.rows[i][p + j - i] += v;
    }

    /// Solve `A x = d`, destroying the matrix copy held internally.
    pub fn solve(&self, d: &mut [f64]) {
        let n = self.rows.len();
        let p = self.p;
        let mut r = self.rows.clone();
        for k in 0..n {
            let piv = r[k][p];
            for i in k + 1..(k + p + 1).min(n) {
                let f = r[i][p + k - i] / piv;
                if f == 0.0 {
                    continue;
                }
                for j in k..(k + p + 1).min(n) {
                    let v = r[k][p + j - k];
                    r[i][p + j - i] -= f * v;
                }
                d[i] -= f * d[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = d[k];
            for j in k + 1..(k + p + 1).min(n) {
                s -= r[k][p + j - k] * d[j];
            }
            d[k] = s / r[k][p];
        }
    }
}

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone)]
pub struct LsqFit {
    pub coeffs: Vec<f64>,
    pub rms: f64,
    pub condition: f64,
}

/// Least squares `min |A c - y|` via SVD, with column scaling so the
/// reported condition number is not dominated by units.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> LsqFit {
    let m = y.len();
    let n = columns.len();
    if n == 0 {
        let rms = (y.iter().map(|v| v * v).sum::<f64>() / m.max(1) as f64).sqrt();
        return LsqFit { coeffs: vec![], rms, condition: 1.0 };
    }
    let scale: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(m, n, |i, j| columns[j][i] / scale[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let sol = svd.solve(&b, smax * 1e-15).expect("svd solve with u and v_t");
    let coeffs: Vec<f64> = (0..n).map(|j| sol[j] / scale[j]).collect();
    let resid = &a * &sol - &b;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    LsqFit { coeffs, rms, condition: smax / smin }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let (v, _) = integrate(|x| x.powi(6), 0.0, 1.0, 1e-15, 0.0);
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn gk_handles_sqrt_endpoint() {
        let (v, _) = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 0.0);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_derivative_of_gaussian() {
        let n = 120;
        let x = cheb_nodes(n, 0.0, 12.0);
        let d = cheb_diff(n, 0.0, 12.0);
        let f = DVector::from_iterator(n + 1, x.iter().map(|&t| (-t * t / 4.0).exp()));
        let df = &d * &f;
        for (i, &t) in x.iter().enumerate() {
            let exact = -0.5 * t * (-t * t / 4.0).exp();
            assert!((df[i] - exact).abs() < 1e-11, "at {t}: {} vs {exact}", df[i]);
        }
    }

    #[test]
    fn clenshaw_curtis_weights_integrate_gaussian() {
        let n = 100;
        let x = cheb_nodes(n, 0.0, 19.0);
        let w = clenshaw_curtis(n, 0.0, 19.0);
        let s: f64 = x.iter().zip(&w).map(|(t, w)| w * (-t * t / 4.0).exp()).sum();
        assert!((s - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn banded_matches_tridiagonal() {
        let n = 7;
        let mut b = Banded::zeros(n, 1);
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            di[i] = 4.0 + i as f64;
            b.set(i, i, di[i]);
            if i > 0 {
                lo[i] = -1.0;
                b.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                up[i] = -2.0;
                b.set(i, i + 1, -2.0);
            }
        }
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x1 = rhs.clone();
        let mut x2 = rhs.clone();
        b.solve(&mut x1);
        solve_tridiagonal(&lo, &di, &up, &mut x2);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_slopes_preserve_shape() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.9, 0.1, 0.0];
        let m = monotone_slopes(&x, &y);
        assert!(m.iter().all(|&s| s <= 0.0));
    }

    #[test]
    fn least_squares_recovers_line() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| 3.0 - 0.5 * x).collect();
        let fit = least_squares(&[vec![1.0; 10], t.clone()], &y);
        assert!((fit.coeffs[0] - 3.0).abs() < 1e-12);
        assert!((fit.coeffs[1] + 0.5).abs() < 1e-12);
    }
}
