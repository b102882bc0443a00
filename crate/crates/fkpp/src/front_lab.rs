//! Glued approximate solution, shift fitting and simulation comparisons.
//!
//! Coordinates: `x` is the front frame, `u(t, x + sigma(t)) ~ phi(x)`, and
//! `y = x + k` is the matching coordinate in which `V0-(y) = y + o(1)` and the
//! outer expansion is evaluated at `eta = y / sqrt(t)`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::fkpp_solver::{FrontTrace, Snapshot, SolverError};
use crate::inner_expansion::{InnerError, InnerTerm};
use crate::numerics::least_squares;
use crate::outer_expansion::{mu_star, ExpansionLedger, OuterError, OuterSolution};
use crate::spectral_halfline::{HalfLineFunction, SpectralBasis, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error(transparent)]
    Inner(#[from] InnerError),
    #[error(transparent)]
    Outer(#[from] OuterError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("epsilon = {0} must lie in (0, 1/8)")]
    InvalidEpsilon(f64),
    #[error("t = {0} must be at least 3")]
    TimeTooSmall(f64),
    #[error("matching point y = {y} lies outside the stored inner grid")]
    MatchOutsideGrid { y: f64 },
    #[error("continuity shift did not converge (last zeta {zeta})")]
    ShiftNotFound { zeta: f64 },
    #[error("design matrix condition {condition:e} exceeds {threshold:e}")]
    IllConditioned { condition: f64, threshold: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("snapshot mismatch: {0}")]
    SnapshotMismatch(String),
}

impl From<SpectralError> for LabError {
    fn from(e: SpectralError) -> Self {
        LabError::Outer(OuterError::from(e))
    }
}

/// `varphi` with `-varphi'' + varphi = delta(x - t^eps)`, `varphi(0) = 0`;
/// zero for `x < 0`.
pub fn glue_phi(t: f64, eps: f64, x: f64) -> f64 {
    let m = t.powf(eps);
    if x < 0.0 {
        0.0
    } else if x <= m {
        (-m).exp() * x.sinh()
    } else {
        m.sinh() * (-x).exp()
    }
}

/// One-sided derivatives of [`glue_phi`] at `x`: `(left, right)`.
pub fn glue_phi_derivative(t: f64, eps: f64, x: f64) -> (f64, f64) {
    let m = t.powf(eps);
    let inner = (-m).exp() * x.cosh();
    let outer = -m.sinh() * (-x).exp();
    if x < 0.0 {
        (0.0, 0.0)
    } else if x < m {
        (inner, inner)
    } else if x == m {
        (inner, outer)
    } else {
        (outer, outer)
    }
}

/// Smooth bump `exp(1 - 1/(1 - (s-1)^2))` on `(0, 2)` with value 1 at 1.
pub fn cutoff(s: f64) -> f64 {
    let d = s - 1.0;
    if d.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - d * d)).exp()
    }
}

fn cutoff_derivative(s: f64) -> f64 {
    let d = s - 1.0;
    if d.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - d * d;
        cutoff(s) * (-2.0 * d / (q * q))
    }
}

/// Outer terms sampled with their derivatives for fast evaluation.
#[derive(Debug, Clone)]
pub struct OuterCache {
    basis: SpectralBasis,
    values: [HalfLineFunction; 4],
    derivs: [HalfLineFunction; 4],
}

impl OuterCache {
    pub fn new(basis: &SpectralBasis, outer: &OuterSolution) -> Result<Self, LabError> {
        let terms = [&outer.v0, &outer.v1, &outer.v2, &outer.v3.term];
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        for term in terms {
            let g = basis.grid(basis.to_grid(&term.function)?);
            derivs.push(basis.derivative(&g)?);
            values.push(g);
        }
        let arr = |v: Vec<HalfLineFunction>| -> [HalfLineFunction; 4] { v.try_into().expect("four terms") };
        Ok(OuterCache { basis: basis.clone(), values: arr(values), derivs: arr(derivs) })
    }

    /// `V+(t, y)` and `dV+/dy`.
    pub fn evaluate(&self, t: f64, y: f64) -> Result<(f64, f64), LabError> {
        let st = t.sqrt();
        let eta = y / st;
        let w = [st, 1.0, t.ln() / st, 1.0 / st];
        let mut v = 0.0;
        let mut dv = 0.0;
        for i in 0..4 {
            v += w[i] * self.basis.value_at(&self.values[i], eta)?;
            dv += w[i] * self.basis.value_at(&self.derivs[i], eta)? / st;
        }
        Ok((v, dv))
    }
}

/// Everything needed to evaluate `V_app` at one time.
#[derive(Debug, Clone)]
pub struct GluedApprox<'a> {
    pub t: f64,
    pub eps: f64,
    pub inner: &'a InnerTerm,
    pub outer: &'a OuterCache,
    /// Matching point `t^eps` in `y`.
    pub match_y: f64,
    pub zeta: f64,
    /// `dV+/dy - dV-/dy` at the matching point.
    pub k_jump: f64,
}

/// Build `V_app` at time `t`: solve for the continuity shift and the
/// derivative jump at `y = t^eps`.
pub fn build_uapp<'a>(inner: &'a InnerTerm, outer: &'a OuterCache, eps: f64, t: f64) -> Result<GluedApprox<'a>, LabError> {
    if !(eps > 0.0 && eps < 0.125) {
        return Err(LabError::InvalidEpsilon(eps));
    }
    if !(t >= 3.0) {
        return Err(LabError::TimeTooSmall(t));
    }
    let m = t.powf(eps);
    let k = inner.wave.k;
    let x_hi = inner.wave.x_hi();
    if m - k + 1.0 > x_hi {
        return Err(LabError::MatchOutsideGrid { y: m });
    }
    let (target, dplus) = outer.evaluate(t, m)?;
    let vm = |z: f64| -> (f64, f64) {
        let (a, da) = inner.wave.v0_matched(m + z);
        let (b, db) = inner.v1_matched(m + z);
        (a + b / t, da + db / t)
    };
    let mut zeta = 0.0;
    let mut ok = false;
    for _ in 0..100 {
        let (v, dv) = vm(zeta);
        let step = (v - target) / dv;
        zeta -= step;
        if !zeta.is_finite() || zeta.abs() > 10.0 {
            return Err(LabError::ShiftNotFound { zeta });
        }
        if step.abs() < 1e-15 * (1.0 + zeta.abs()) {
            ok = true;
            break;
        }
    }
    if !ok {
        // Accept a stagnated iterate if the continuity defect is at roundoff.
        let (v, _) = vm(zeta);
        if (v - target).abs() > 1e-12 * target.abs().max(1.0) {
            return Err(LabError::ShiftNotFound { zeta });
        }
    }
    let (_, dminus) = vm(zeta);
    Ok(GluedApprox { t, eps, inner, outer, match_y: m, zeta, k_jump: dplus - dminus })
}

impl GluedApprox<'_> {
    /// Shifted inner expansion at `y`.
    pub fn v_minus(&self, y: f64) -> (f64, f64) {
        let (a, da) = self.inner.wave.v0_matched(y + self.zeta);
        let (b, db) = self.inner.v1_matched(y + self.zeta);
        (a + b / self.t, da + db / self.t)
    }

    pub fn v_plus(&self, y: f64) -> Result<(f64, f64), LabError> {
        self.outer.evaluate(self.t, y)
    }

    fn corrector(&self, y: f64, right: bool) -> (f64, f64) {
        let m = self.match_y;
        let th = cutoff(y / m);
        let dth = cutoff_derivative(y / m) / m;
        let p = glue_phi(self.t, self.eps, y);
        let (dl, dr) = glue_phi_derivative(self.t, self.eps, y);
        let dp = if right { dr } else { dl };
        (self.k_jump * th * p, self.k_jump * (dth * p + th * dp))
    }

    /// `V_app(t, y)` and its derivative (right-sided at the matching point).
    pub fn v_app(&self, y: f64) -> Result<(f64, f64), LabError> {
        let (c, dc) = self.corrector(y, true);
        let (v, dv) = if y < self.match_y { self.v_minus(y) } else { self.v_plus(y)? };
        Ok((v + c, dv + dc))
    }

    /// `|V-(m) - V+(m)|` at the matching point.
    pub fn continuity_jump(&self) -> Result<f64, LabError> {
        let m = self.match_y;
        Ok((self.v_minus(m).0 - self.v_plus(m)?.0).abs())
    }

    /// Derivative jump `dV-/dy - dV+/dy` without the corrector.
    pub fn derivative_jump_before(&self) -> Result<f64, LabError> {
        let m = self.match_y;
        Ok(self.v_minus(m).1 - self.v_plus(m)?.1)
    }

    /// Derivative jump of `V_app` itself (right minus left) at the matching point.
    pub fn derivative_jump_after(&self) -> Result<f64, LabError> {
        let m = self.match_y;
        let (_, cl) = self.corrector(m, false);
        let (_, cr) = self.corrector(m, true);
        Ok((self.v_plus(m)?.1 + cr) - (self.v_minus(m).1 + cl))
    }

    /// `u_app(t, x + sigma(t)) = e^{-x} V_app(t, x + k)`.
    pub fn u_app(&self, x: f64) -> Result<f64, LabError> {
        Ok((-x).exp() * self.v_app(x + self.inner.wave.k)?.0)
    }
}

/// Log-log slope of `|zeta(t)|` over the given times.
pub fn zeta_decay_exponent(inner: &InnerTerm, outer: &OuterCache, eps: f64, times: &[f64]) -> Result<f64, LabError> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &t in times {
        let g = build_uapp(inner, outer, eps, t)?;
        lx.push(t.ln());
        ly.push(g.zeta.abs().ln());
    }
    let fit = least_squares(&[vec![1.0; lx.len()], lx], &ly);
    Ok(fit.coeffs[1])
}

/// How a stage-5 or comparison fit treats the `log t / t` coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuMode {
    Free,
    Frozen(f64),
}

/// Options for [`fit_shift`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub t_min: f64,
    pub t_max: f64,
    /// Number of stages to run, 1 to 6.
    pub stages: usize,
    /// Freeze `b` at `-3 sqrt(pi)` in stages 5 and 6 (otherwise the stage-4
    /// estimate is reused in stage 5 and refit in stage 6).
    pub freeze_sqrt: bool,
    pub mu: MuMode,
    /// `log t / t` coefficient held fixed while stage 4 estimates `b`
    /// (`None` leaves the term out).
    pub stage4_mu: Option<f64>,
    /// Add a `t^{-3/2}` nuisance column to stages 4 to 6.
    pub higher_order: bool,
    /// Stage-5 condition-number limit.
    pub condition_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            t_min: 100.0,
            t_max: 1e4,
            stages: 5,
            freeze_sqrt: true,
            mu: MuMode::Free,
            stage4_mu: Some(mu_star()),
            higher_order: false,
            condition_threshold: 1e8,
        }
    }
}

/// One stage of the sequential fit.
#[derive(Debug, Clone)]
pub struct StageResult {
    pub stage: usize,
    pub name: &'static str,
    pub coeffs: Vec<(&'static str, f64)>,
    pub rms: f64,
    pub condition: f64,
}

/// Stage-wise estimates of the shift coefficients at one level.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub level: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    pub speed: Option<f64>,
    pub log_coeff: Option<f64>,
    /// Constant term `alpha_0 + x_s` of the level curve.
    pub constant: Option<f64>,
    pub sqrt_coeff: Option<f64>,
    pub mu: Option<f64>,
    /// `1/t` coefficient of the level curve.
    pub inv_t: Option<f64>,
    pub stages: Vec<StageResult>,
}

impl FitReport {
    pub fn rms_decreasing(&self) -> bool {
        self.stages.windows(2).all(|w| w[1].rms <= w[0].rms)
    }
}

fn fit_stage(stage: usize, name: &'static str, labels: &[&'static str], cols: Vec<Vec<f64>>, y: &[f64]) -> StageResult {
    let fit = least_squares(&cols, y);
    StageResult { stage, name, coeffs: labels.iter().copied().zip(fit.coeffs.iter().copied()).collect(), rms: fit.rms, condition: fit.condition }
}

/// Sequential constrained fits of `sigma_s(t)` over `[t_min, t_max]`.
///
/// 1. `c t + d` (speed check)
/// 2. speed 2, `c log t + d`
/// 3. log coefficient `-3/2`, constant plus a `1/t` time-origin nuisance
/// 4. adds `b / sqrt(t)` with `mu log t / t` held at `stage4_mu`
/// 5. `b` frozen, constant plus `(mu log t + B)/t`
/// 6. all of constant, `b`, `mu`, `B` free
pub fn fit_shift(trace: &FrontTrace, level: f64, opts: &FitOptions) -> Result<FitReport, LabError> {
    let data: Vec<(f64, f64)> = trace.series(level).into_iter().filter(|&(t, _)| t >= opts.t_min && t <= opts.t_max).collect();
    fit_series(&data, level, opts)
}

/// [`fit_shift`] on explicit `(t, sigma - 2t)` samples.
pub fn fit_series(data: &[(f64, f64)], level: f64, opts: &FitOptions) -> Result<FitReport, LabError> {
    if !(1..=6).contains(&opts.stages) {
        return Err(LabError::InsufficientData(format!("stages must be 1..=6, got {}", opts.stages)));
    }
    if data.len() < 8 {
        return Err(LabError::InsufficientData(format!("{} samples in the fit window", data.len())));
    }
    let t: Vec<f64> = data.iter().map(|d| d.0).collect();
    let xi: Vec<f64> = data.iter().map(|d| d.1).collect();
    let ones = vec![1.0; t.len()];
    let lt: Vec<f64> = t.iter().map(|t| t.ln()).collect();
    let inv: Vec<f64> = t.iter().map(|t| 1.0 / t).collect();
    let isq: Vec<f64> = t.iter().map(|t| 1.0 / t.sqrt()).collect();
    let ltt: Vec<f64> = t.iter().map(|t| t.ln() / t).collect();
    let t32: Vec<f64> = t.iter().map(|t| t.powf(-1.5)).collect();
    let with_higher = |mut cols: Vec<Vec<f64>>, mut labels: Vec<&'static str>| {
        if opts.higher_order {
            cols.push(t32.clone());
            labels.push("t^-3/2");
        }
        (cols, labels)
    };
    let mut rep = FitReport {
        level,
        t_min: t[0],
        t_max: t[t.len() - 1],
        samples: t.len(),
        speed: None,
        log_coeff: None,
        constant: None,
        sqrt_coeff: None,
        mu: None,
        inv_t: None,
        stages: Vec::new(),
    };
    let sigma: Vec<f64> = t.iter().zip(&xi).map(|(t, x)| x + 2.0 * t).collect();
    let s1 = fit_stage(1, "speed", &["c", "d"], vec![t.clone(), ones.clone()], &sigma);
    rep.speed = Some(s1.coeffs[0].1);
    rep.stages.push(s1);
    if opts.stages >= 2 {
        let s2 = fit_stage(2, "log", &["c_log", "d"], vec![lt.clone(), ones.clone()], &xi);
        rep.log_coeff = Some(s2.coeffs[0].1);
        rep.stages.push(s2);
    }
    let r3: Vec<f64> = xi.iter().zip(&lt).map(|(x, l)| x + 1.5 * l).collect();
    if opts.stages >= 3 {
        let s3 = fit_stage(3, "alpha0", &["A", "t0"], vec![ones.clone(), inv.clone()], &r3);
        rep.constant = Some(s3.coeffs[0].1);
        rep.inv_t = Some(s3.coeffs[1].1);
        rep.stages.push(s3);
    }
    if opts.stages >= 4 {
        let m4 = opts.stage4_mu.unwrap_or(0.0);
        let r4: Vec<f64> = r3.iter().zip(&ltt).map(|(r, l)| r - m4 * l).collect();
        let (cols, labels) = with_higher(vec![ones.clone(), isq.clone(), inv.clone()], vec!["A", "b", "B"]);
        let s4 = fit_stage(4, "sqrt", &labels, cols, &r4);
        rep.constant = Some(s4.coeffs[0].1);
        rep.sqrt_coeff = Some(s4.coeffs[1].1);
        rep.inv_t = Some(s4.coeffs[2].1);
        rep.stages.push(s4);
    }
    if opts.stages >= 5 {
        let b = if opts.freeze_sqrt { -3.0 * PI.sqrt() } else { rep.sqrt_coeff.unwrap_or(-3.0 * PI.sqrt()) };
        let r5: Vec<f64> = r3.iter().zip(&isq).map(|(r, s)| r - b * s).collect();
        let s5 = match opts.mu {
            MuMode::Free => {
                let (cols, labels) = with_higher(vec![ones.clone(), ltt.clone(), inv.clone()], vec!["A", "mu", "B"]);
                let s = fit_stage(5, "mu", &labels, cols, &r5);
                if s.condition > opts.condition_threshold {
                    return Err(LabError::IllConditioned { condition: s.condition, threshold: opts.condition_threshold });
                }
                rep.mu = Some(s.coeffs[1].1);
                rep.inv_t = Some(s.coeffs[2].1);
                s
            }
            MuMode::Frozen(mu) => {
                let r: Vec<f64> = r5.iter().zip(&ltt).map(|(r, l)| r - mu * l).collect();
                let (cols, labels) = with_higher(vec![ones.clone(), inv.clone()], vec!["A", "B"]);
                let mut s = fit_stage(5, "mu", &labels, cols, &r);
                s.coeffs.insert(1, ("mu", mu));
                rep.mu = Some(mu);
                rep.inv_t = Some(s.coeffs[2].1);
                s
            }
        };
        rep.constant = Some(s5.coeffs[0].1);
        if opts.freeze_sqrt {
            rep.sqrt_coeff = Some(b);
        }
        rep.stages.push(s5);
    }
    if opts.stages >= 6 {
        let (cols, labels) = with_higher(vec![ones, isq, ltt, inv], vec!["A", "b", "mu", "B"]);
        let s6 = fit_stage(6, "joint", &labels, cols, &r3);
        if s6.condition > opts.condition_threshold {
            return Err(LabError::IllConditioned { condition: s6.condition, threshold: opts.condition_threshold });
        }
        rep.constant = Some(s6.coeffs[0].1);
        rep.sqrt_coeff = Some(s6.coeffs[1].1);
        rep.mu = Some(s6.coeffs[2].1);
        rep.inv_t = Some(s6.coeffs[3].1);
        rep.stages.push(s6);
    }
    Ok(rep)
}

/// Shift coefficients in the front frame of the inner expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftFit {
    pub alpha0: f64,
    pub alpha1: f64,
    pub mu: f64,
    /// Fitted `t^{-3/2}` coefficient (0 when not fitted).
    pub higher: f64,
    pub level: f64,
    pub rms: f64,
}

impl ShiftFit {
    /// `sigma(t) - 2t`.
    pub fn xi(&self, t: f64) -> f64 {
        -1.5 * t.ln() + self.alpha0 - 3.0 * PI.sqrt() / t.sqrt() + self.mu * t.ln() / t + self.alpha1 / t + self.higher * t.powf(-1.5)
    }

    pub fn sigma(&self, t: f64) -> f64 {
        2.0 * t + self.xi(t)
    }
}

/// Fit `alpha_0`, `alpha_1` from a level curve with `mu` frozen, optionally
/// with a `t^{-3/2}` nuisance term. The level curve is
/// `sigma_s = sigma + x_s - psi(x_s)/(phi'(x_s) t) + ...` where `phi(x_s) = s`.
pub fn fit_alphas(trace: &FrontTrace, inner: &InnerTerm, level: f64, t_min: f64, t_max: f64, mu: f64, higher_order: bool) -> Result<ShiftFit, LabError> {
    let opts = FitOptions { t_min, t_max, stages: 5, freeze_sqrt: true, mu: MuMode::Frozen(mu), higher_order, condition_threshold: f64::INFINITY, ..Default::default() };
    let rep = fit_shift(trace, level, &opts)?;
    let xs = inner.wave.inverse(level).ok_or_else(|| LabError::InsufficientData(format!("level {level} outside (0, 1)")))?;
    let last = rep.stages.last().ok_or_else(|| LabError::InsufficientData("no stages".into()))?;
    let a = rep.constant.unwrap_or(f64::NAN);
    let b = rep.inv_t.unwrap_or(f64::NAN);
    let higher = last.coeffs.iter().find(|c| c.0 == "t^-3/2").map(|c| c.1).unwrap_or(0.0);
    Ok(ShiftFit { alpha0: a - xs, alpha1: b + inner.psi(xs) / inner.wave.dphi(xs), mu, higher, level, rms: last.rms })
}

/// Ledger consistent with fitted shift coefficients: `q3` follows from
/// `alpha_1` through the balance.
pub fn ledger_from_fit(fit: &ShiftFit, inner: &InnerTerm, v3bar_slope: f64) -> ExpansionLedger {
    let mut l = ExpansionLedger::new(fit.mu, fit.alpha0, 0.0, inner.c1_minus, v3bar_slope);
    l.set_alpha1(fit.alpha1);
    l
}

/// Errors between a snapshot and the approximations at its time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub t: f64,
    /// `sup_{|x| <= 5} |t (u(t, x + sigma) - phi(x)) - psi(x)|`.
    pub local_error: f64,
    /// `sup |e^x u(t, x + sigma) - V_app(t, y)| / (1 + |y|)` over `y >= 2 - t^eps`.
    pub weighted_error: Option<f64>,
}

/// Compare a snapshot with `phi + psi/t` and, if given, with `V_app`.
/// `xi_shift` is `sigma(t) - 2t`.
pub fn compare_profiles(snap: &Snapshot, inner: &InnerTerm, xi_shift: f64, glued: Option<&GluedApprox>) -> Result<CompareReport, LabError> {
    let t = snap.t;
    if let Some(g) = glued {
        if (g.t - t).abs() > 1e-9 * t {
            return Err(LabError::SnapshotMismatch(format!("snapshot at t = {t}, approximation at t = {}", g.t)));
        }
    }
    if !(t > 0.0) {
        return Err(LabError::SnapshotMismatch("snapshot at t = 0".into()));
    }
    let k = inner.wave.k;
    let mut local: f64 = 0.0;
    let mut weighted: f64 = 0.0;
    let mut seen = false;
    for i in 0..snap.v.len() {
        let xi = snap.xi(i);
        let x = xi - xi_shift;
        if x.abs() <= 5.0 {
            seen = true;
            let u = snap.u(i);
            local = local.max((t * (u - inner.wave.phi(x)) - inner.psi(x)).abs());
        }
        if let Some(g) = glued {
            let y = x + k;
            if y >= 2.0 - g.match_y {
                let v = (x - xi).exp() * snap.v[i];
                let va = g.v_app(y)?.0;
                weighted = weighted.max((v - va).abs() / (1.0 + y.abs()));
            }
        }
    }
    if !seen {
        return Err(LabError::SnapshotMismatch("window does not cover |x| <= 5".into()));
    }
    Ok(CompareReport { t, local_error: local, weighted_error: glued.map(|_| weighted) })
}

/// `mu*` re-exported for callers that only need the target value.
pub fn target_mu() -> f64 {
    mu_star()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glue_phi_branches() {
        let (t, e) = (100.0f64, 0.05);
        let m = t.powf(e);
        assert_eq!(glue_phi(t, e, 0.0), 0.0);
        let both = (-m).exp() * m.sinh();
        assert!((glue_phi(t, e, m) - both).abs() < 1e-15);
        assert!((m.sinh() * (-m).exp() - both).abs() < 1e-15);
        let (l, r) = glue_phi_derivative(t, e, m);
        assert!((r - l + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(1.0), 1.0);
        assert_eq!(cutoff(0.0), 0.0);
        assert_eq!(cutoff(2.0), 0.0);
        assert_eq!(cutoff_derivative(1.0), 0.0);
        let h = 1e-6;
        let fd = (cutoff(0.7 + h) - cutoff(0.7 - h)) / (2.0 * h);
        assert!((fd - cutoff_derivative(0.7)).abs() < 1e-8);
    }

    #[test]
    fn synthetic_round_trip() {
        let (a0, a1) = (0.3, -1.2);
        let data: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let t = 100.0 * 10f64.powf(i as f64 / 200.0);
                (t, -1.5 * t.ln() + a0 - 3.0 * PI.sqrt() / t.sqrt() + mu_star() * t.ln() / t + a1 / t)
            })
            .collect();
        let rep = fit_series(&data, 0.5, &FitOptions { stages: 5, ..Default::default() }).unwrap();
        assert!((rep.constant.unwrap() - a0).abs() < 1e-9);
        assert!((rep.inv_t.unwrap() - a1).abs() < 1e-6);
        assert!((rep.mu.unwrap() - mu_star()).abs() < 1e-7);
    }
}
