//! Direct integration of `u_t = u_xx + u(1 - u)` from step-like data.
//!
//! The field is carried as `v = e^xi u` in the frame `xi = x - 2t`, where
//! the equation reads `v_t = v_xixi - e^{-xi} v^2`. The linear part is a pure
//! heat equation, so the discrete linear spreading speed is exactly 2 and the
//! leading edge `v ~ xi` is represented without truncation error. The
//! Laplacian is the five-point fourth-order stencil; the reaction
//! coefficient is scaled by that stencil's symbol at `e^xi`, which makes
//! `u = 1` an exact discrete equilibrium.
//!
//! Two time integrators are available: fully implicit variable-step BDF2
//! with Newton (default), and Strang splitting of Crank-Nicolson diffusion
//! with the exact logistic map.

use thiserror::Error;

use crate::numerics::hermite_cubic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("initial value {value} at x = {x} lies outside [0, 1]")]
    InvalidInitialData { x: f64, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("u = {value} at xi = {xi}, t = {t} left [0, 1]")]
    StabilityBreach { t: f64, xi: f64, value: f64 },
    #[error("Newton iteration stalled at t = {t} (update {update:e})")]
    NewtonFailure { t: f64, update: f64 },
    #[error("level {level} is not crossed on the window")]
    LevelNotBracketed { level: f64 },
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Bdf2,
    /// Crank-Nicolson is not L-stable: the stiff modes of step data ring
    /// once `dt / h^2` is large, so keep `dt` small (a few `1e-3` at
    /// `h = 0.02`).
    Strang,
}

/// Initial profile between `-L` and `L`.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    /// `1` for `x < 0`, `1/2` at `0`, `0` for `x > 0`.
    Step,
    /// Linear from `1` at `-L` to `0` at `L`.
    Ramp,
    /// Step plus `amplitude (1 - (x/L)^2)` on `(-L, L)`, clamped to `[0, 1]`.
    Bump { amplitude: f64 },
    /// Arbitrary values on `(-L, L)`; must lie in `[0, 1]`.
    Custom(fn(f64) -> f64),
}

/// Initial data: equal to 1 left of `-l`, 0 right of `l`.
#[derive(Debug, Clone, Copy)]
pub struct InitialData {
    pub l: f64,
    pub shape: Shape,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData { l: 0.0, shape: Shape::Step }
    }
}

impl InitialData {
    pub fn value(&self, x: f64) -> f64 {
        let l = self.l;
        if x < -l {
            return 1.0;
        }
        if x > l {
            return 0.0;
        }
        let step = if x < 0.0 {
            1.0
        } else if x > 0.0 {
            0.0
        } else {
            0.5
        };
        match self.shape {
            Shape::Step => step,
            Shape::Ramp => {
                if l == 0.0 {
                    step
                } else {
                    0.5 * (1.0 - x / l)
                }
            }
            Shape::Bump { amplitude } => {
                let b = if l > 0.0 { amplitude * (1.0 - (x / l).powi(2)) } else { 0.0 };
                (step + b).clamp(0.0, 1.0)
            }
            Shape::Custom(f) => f(x),
        }
    }
}

/// Grid and field in the frame `xi = x - 2t`.
#[derive(Debug, Clone)]
pub struct PdeState {
    pub t: f64,
    pub xi_left: f64,
    pub h: f64,
    /// `v = e^xi u` at `xi_left + i h`, including both Dirichlet nodes.
    pub v: Vec<f64>,
    v_prev: Option<(Vec<f64>, f64)>,
    kappa: f64,
    /// Cached `e^{-xi}` at the nodes.
    emx: Vec<f64>,
    /// Largest `max(-u, u - 1)` seen after any step.
    pub range_excursion: f64,
}

/// Excursion of `u` outside `[0, 1]` tolerated before a step is rejected.
/// The five-point stencil is not an M-matrix: while the graded start-up
/// resolves the discontinuity of step data (`dt / h^2` tiny) it overshoots
/// by about `1e-3`, decaying well before `t = 1`.
pub const RANGE_TOLERANCE: f64 = 1e-2;

/// Symbol of the five-point Laplacian at `e^xi`: `1 - h^4/90 + ...`.
fn stencil_symbol(h: f64) -> f64 {
    (-2.0 * (2.0 * h).cosh() + 32.0 * h.cosh() - 30.0) / (12.0 * h * h)
}

/// `u e^dt / (1 + u (e^dt - 1))`, the exact flow of `u' = u(1 - u)`.
pub fn logistic_map(u: f64, dt: f64) -> f64 {
    let e = dt.exp();
    u * e / (1.0 + u * (e - 1.0))
}

/// Build the initial state on `[xi_left, xi_right]` with spacing `h`.
pub fn init_step(data: &InitialData, h: f64, xi_left: f64, xi_right: f64) -> Result<PdeState, SolverError> {
    if !(data.l >= 0.0) {
        return Err(SolverError::InvalidConfig(format!("L = {} must be nonnegative", data.l)));
    }
    if !(h > 0.0) || xi_left >= -data.l || xi_right <= data.l {
        return Err(SolverError::InvalidConfig("window must contain [-L, L]".into()));
    }
    let n = ((xi_right - xi_left) / h).ceil() as usize + 1;
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let x = xi_left + i as f64 * h;
        let u = data.value(x);
        if !(0.0..=1.0).contains(&u) {
            return Err(SolverError::InvalidInitialData { x, value: u });
        }
        v.push(x.exp() * u);
    }
    let emx = (0..n).map(|i| (-(xi_left + i as f64 * h)).exp()).collect();
    Ok(PdeState { t: 0.0, xi_left, h, v, v_prev: None, kappa: stencil_symbol(h), emx, range_excursion: 0.0 })
}

/// Symmetric pentadiagonal system with constant off-diagonals `e1`, `e2`
/// and diagonal `d`, factored as `L D L^T`.
struct Penta {
    l1: Vec<f64>,
    l2: Vec<f64>,
    dd: Vec<f64>,
}

impl Penta {
    fn factor(d: &[f64], e1: f64, e2: f64) -> Penta {
        let n = d.len();
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        let mut dd = vec![0.0; n];
        for i in 0..n {
            let mut di = d[i];
            if i >= 2 {
                l2[i] = e2 / dd[i - 2];
            }
            if i >= 1 {
                let mut a = e1;
                if i >= 2 {
                    a -= l2[i] * dd[i - 2] * l1[i - 1];
                }
                l1[i] = a / dd[i - 1];
                di -= l1[i] * l1[i] * dd[i - 1];
            }
            if i >= 2 {
                di -= l2[i] * l2[i] * dd[i - 2];
            }
            dd[i] = di;
        }
        Penta { l1, l2, dd }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 1..n {
            let mut z = b[i] - self.l1[i] * b[i - 1];
            if i >= 2 {
                z -= self.l2[i] * b[i - 2];
            }
            b[i] = z;
        }
        for i in 0..n {
            b[i] /= self.dd[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let mut x = b[i] - self.l1[i + 1] * b[i + 1];
            if i + 2 < n {
                x -= self.l2[i + 2] * b[i + 2];
            }
            b[i] = x;
        }
    }
}

impl PdeState {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.xi_left + i as f64 * self.h
    }

    pub fn xi_right(&self) -> f64 {
        self.xi(self.len() - 1)
    }

    /// Lab-frame position of the window origin, `2t`.
    pub fn frame_offset(&self) -> f64 {
        2.0 * self.t
    }

    pub fn u(&self, i: usize) -> f64 {
        self.emx[i] * self.v[i]
    }

    pub fn u_values(&self) -> Vec<f64> {
        self.v.iter().zip(&self.emx).map(|(v, e)| v * e).collect()
    }

    /// Value left of the grid, `e^xi` at `u = 1`.
    fn ghost_left(&self) -> f64 {
        (self.xi_left - self.h).exp()
    }

    /// `Delta_4 v` at interior node `i`, with `ghost` left of the grid and
    /// zero right of it.
    fn laplacian(v: &[f64], i: usize, ghost: f64, h: f64) -> f64 {
        let n = v.len();
        let at = |j: usize| -> f64 {
            if j < 2 {
                ghost
            } else if j - 2 >= n {
                0.0
            } else {
                v[j - 2]
            }
        };
        // Offset indices by 2 so that i - 2 never underflows.
        let j = i + 2;
        (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2)) / (12.0 * h * h)
    }

    /// Append zero nodes so the right edge reaches `xi_right`.
    pub fn extend_right(&mut self, xi_right: f64) {
        while self.xi_right() < xi_right {
            self.v.push(0.0);
            self.emx.push((-(self.xi_left + self.emx.len() as f64 * self.h)).exp());
            if let Some((p, _)) = self.v_prev.as_mut() {
                p.push(0.0);
            }
        }
    }

    /// Advance by `dt` with the chosen scheme.
    pub fn step(&mut self, dt: f64, scheme: Scheme) -> Result<(), SolverError> {
        if !(dt > 0.0) {
            return Err(SolverError::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        match scheme {
            Scheme::Bdf2 => self.step_bdf2(dt)?,
            Scheme::Strang => self.step_strang(dt),
        }
        self.t += dt;
        self.check_range()
    }

    fn check_range(&mut self) -> Result<(), SolverError> {
        for i in 0..self.len() {
            let u = self.u(i);
            let out = (-u).max(u - 1.0);
            if !(out <= RANGE_TOLERANCE) {
                return Err(SolverError::StabilityBreach { t: self.t, xi: self.xi(i), value: u });
            }
            self.range_excursion = self.range_excursion.max(out);
        }
        Ok(())
    }

    fn step_bdf2(&mut self, dt: f64) -> Result<(), SolverError> {
        let n = self.len();
        let m = n - 2;
        let h2 = 12.0 * self.h * self.h;
        // Variable-step BDF2; the first step is backward Euler.
        let (a, rhs_base, guess): (f64, Vec<f64>, Vec<f64>) = match &self.v_prev {
            Some((prev, dt_prev)) => {
                let w = dt / dt_prev;
                let a = (1.0 + 2.0 * w) / (1.0 + w);
                let b: Vec<f64> = (0..n).map(|i| (1.0 + w) * self.v[i] - w * w / (1.0 + w) * prev[i]).collect();
                let g: Vec<f64> = (0..n).map(|i| (self.v[i] + w * (self.v[i] - prev[i])).max(0.0)).collect();
                (a, b, g)
            }
            None => (1.0, self.v.clone(), self.v.clone()),
        };
        let mut x = guess;
        x[0] = self.v[0];
        x[n - 1] = 0.0;
        let e1 = -16.0 * dt / h2;
        let e2 = dt / h2;
        let ghost = self.ghost_left();
        let mut last = f64::INFINITY;
        let mut diag = vec![0.0; m];
        let mut r = vec![0.0; m];
        for _ in 0..12 {
            for k in 0..m {
                let i = k + 1;
                let ex = self.emx[i];
                let lap = Self::laplacian(&x, i, ghost, self.h);
                r[k] = -(a * x[i] - rhs_base[i] - dt * (lap - self.kappa * ex * x[i] * x[i]));
                diag[k] = a + 30.0 * dt / h2 + 2.0 * dt * self.kappa * ex * x[i];
            }
            let f = Penta::factor(&diag, e1, e2);
            f.solve(&mut r);
            let mut upd: f64 = 0.0;
            for k in 0..m {
                let i = k + 1;
                x[i] += r[k];
                upd = upd.max(self.emx[i] * r[k].abs());
            }
            last = upd;
            if upd < 1e-13 {
                let old = std::mem::replace(&mut self.v, x);
                self.v_prev = Some((old, dt));
                return Ok(());
            }
        }
        Err(SolverError::NewtonFailure { t: self.t, update: last })
    }

    fn step_strang(&mut self, dt: f64) {
        self.react(0.5 * dt);
        let n = self.len();
        let m = n - 2;
        let h2 = 12.0 * self.h * self.h;
        // CN for v_t = Delta_4 v - v.
        let c = 0.5 * dt;
        let gl = self.ghost_left();
        let mut r = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            r[k] = self.v[i] + c * (Self::laplacian(&self.v, i, gl, self.h) - self.v[i]);
        }
        // Boundary contributions on the implicit side.
        let v0 = self.v[0];
        r[0] += c * (16.0 * v0 - gl) / h2;
        if m > 1 {
            r[1] += c * (-v0) / h2;
        }
        let diag = vec![1.0 + c + c * 30.0 / h2; m];
        let f = Penta::factor(&diag, -16.0 * c / h2, c / h2);
        f.solve(&mut r);
        self.v[1..n - 1].copy_from_slice(&r);
        self.react(0.5 * dt);
        self.v_prev = None;
    }

    fn react(&mut self, tau: f64) {
        let e = tau.exp();
        for i in 1..self.len() - 1 {
            let u = self.u(i);
            self.v[i] *= e / (1.0 + u * (e - 1.0));
        }
    }

    /// Largest increase `u_{i+1} - u_i` on the grid (0 for monotone data).
    pub fn monotonicity_defect(&self) -> f64 {
        let u = self.u_values();
        u.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Rightmost `xi` with `u = s` in the co-moving frame.
    pub fn front_xi(&self, s: f64) -> Result<f64, SolverError> {
        front_crossing(self.xi_left, self.h, &self.u_values(), s)
    }

    /// `sigma_s(t)` in the lab frame.
    pub fn front_position(&self, s: f64) -> Result<f64, SolverError> {
        Ok(self.front_xi(s)? + self.frame_offset())
    }
}

/// Rightmost crossing of level `s` by samples `u` on a uniform grid, located
/// with a monotone cubic between the bracketing nodes. Slopes are fourth-order
/// differences, limited with the Fritsch-Carlson conditions.
pub fn front_crossing(x0: f64, h: f64, u: &[f64], s: f64) -> Result<f64, SolverError> {
    let n = u.len();
    if !(s > 0.0 && s < 1.0) || n < 2 {
        return Err(SolverError::LevelNotBracketed { level: s });
    }
    let i = (0..n - 1)
        .rev()
        .find(|&i| (u[i] - s) * (u[i + 1] - s) <= 0.0 && u[i] != u[i + 1])
        .ok_or(SolverError::LevelNotBracketed { level: s })?;
    let slope = |j: usize| -> f64 {
        if j >= 2 && j + 2 < n {
            (u[j - 2] - 8.0 * u[j - 1] + 8.0 * u[j + 1] - u[j + 2]) / (12.0 * h)
        } else if j >= 1 && j + 1 < n {
            (u[j + 1] - u[j - 1]) / (2.0 * h)
        } else if j == 0 {
            (u[1] - u[0]) / h
        } else {
            (u[j] - u[j - 1]) / h
        }
    };
    let d = (u[i + 1] - u[i]) / h;
    let (mut m0, mut m1) = (slope(i), slope(i + 1));
    let mut a = m0 / d;
    let mut b = m1 / d;
    if a < 0.0 {
        a = 0.0;
    }
    if b < 0.0 {
        b = 0.0;
    }
    let r = a * a + b * b;
    if r > 9.0 {
        let f = 3.0 / r.sqrt();
        a *= f;
        b *= f;
    }
    m0 = a * d;
    m1 = b * d;
    let p = |t: f64| hermite_cubic(u[i], u[i + 1], h * m0, h * m1, t) - s;
    let (mut lo, mut hi) = (0.0, 1.0);
    let increasing = u[i + 1] > u[i];
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if (p(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(x0 + (i as f64 + 0.5 * (lo + hi)) * h)
}

/// One trace sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub level: f64,
    /// Crossing in the co-moving frame, `sigma - 2t`.
    pub xi: f64,
}

impl TraceRecord {
    pub fn sigma(&self) -> f64 {
        self.xi + 2.0 * self.t
    }
}

/// Front positions over time.
#[derive(Debug, Clone, Default)]
pub struct FrontTrace {
    pub records: Vec<TraceRecord>,
}

impl FrontTrace {
    pub fn levels(&self) -> Vec<f64> {
        let mut l: Vec<f64> = Vec::new();
        for r in &self.records {
            if !l.contains(&r.level) {
                l.push(r.level);
            }
        }
        l
    }

    /// `(t, sigma - 2t)` at one level, in time order.
    pub fn series(&self, level: f64) -> Vec<(f64, f64)> {
        self.records.iter().filter(|r| r.level == level).map(|r| (r.t, r.xi)).collect()
    }

    /// `(t, sigma)` at one level.
    pub fn sigma_series(&self, level: f64) -> Vec<(f64, f64)> {
        self.records.iter().filter(|r| r.level == level).map(|r| (r.t, r.sigma())).collect()
    }

    /// Linear interpolation of `sigma - 2t` at time `t`.
    pub fn xi_at(&self, level: f64, t: f64) -> Option<f64> {
        let s = self.series(level);
        let k = s.iter().position(|&(tt, _)| tt >= t)?;
        if k == 0 || s[k].0 == t {
            return ((s[k].0 - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(s[k].1);
        }
        let (t0, x0) = s[k - 1];
        let (t1, x1) = s[k];
        Some(x0 + (x1 - x0) * (t - t0) / (t1 - t0))
    }
}

/// Field at a requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub xi_left: f64,
    pub h: f64,
    pub v: Vec<f64>,
}

impl Snapshot {
    pub fn xi(&self, i: usize) -> f64 {
        self.xi_left + i as f64 * self.h
    }

    pub fn u(&self, i: usize) -> f64 {
        (-self.xi(i)).exp() * self.v[i]
    }

    pub fn u_values(&self) -> Vec<f64> {
        (0..self.v.len()).map(|i| self.u(i)).collect()
    }

    pub fn front_xi(&self, s: f64) -> Result<f64, SolverError> {
        front_crossing(self.xi_left, self.h, &self.u_values(), s)
    }
}

/// Parameters for [`run`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub t_final: f64,
    pub levels: Vec<f64>,
    pub h: f64,
    /// Base time step: graded up to it during start-up, then the floor.
    pub dt: f64,
    /// Steps grow like `dt_ratio * t` once that exceeds `dt`.
    pub dt_ratio: f64,
    /// Start-up time scale: below it steps shrink like `dt t / startup`, so
    /// the layer of the discontinuous data is resolved at every refinement
    /// (0 disables the grading).
    pub startup: f64,
    pub dt_max: f64,
    pub initial: InitialData,
    pub snapshots: Vec<f64>,
    pub scheme: Scheme,
    pub xi_left: f64,
    /// Right edge is kept at `right_margin + right_scale * sqrt(t)` or beyond.
    pub right_scale: f64,
    pub right_margin: f64,
    /// Trace is recorded from this time on.
    pub trace_from: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_final: 100.0,
            levels: vec![0.5],
            h: 0.02,
            dt: 0.01,
            dt_ratio: 0.002,
            startup: 0.05,
            dt_max: f64::INFINITY,
            initial: InitialData::default(),
            snapshots: Vec::new(),
            scheme: Scheme::Bdf2,
            xi_left: -80.0,
            right_scale: 12.0,
            right_margin: 30.0,
            trace_from: 1.0,
        }
    }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: FrontTrace,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub max_monotonicity_defect: f64,
    /// Largest excursion of `u` outside `[0, 1]` for `t >= 1`.
    pub max_range_excursion: f64,
    /// The same over the whole run, start-up layer included.
    pub startup_range_excursion: f64,
    pub final_state: PdeState,
}

/// Step-size law: `dt s/(s + startup)` early (capped at `0.3 s` to keep the
/// BDF2 step ratio small), `dt_ratio t` late, never above `dt_max`; here
/// `s = t + 1e-3 dt`.
fn step_size(config: &RunConfig, t: f64) -> f64 {
    let s = t + 1e-3 * config.dt;
    let early = if config.startup > 0.0 { (config.dt * s / (s + config.startup)).min(0.3 * s) } else { config.dt };
    early.max(config.dt_ratio * t).min(config.dt_max)
}

/// Integrate to `t_final`, recording the trace after every step past
/// `trace_from` and snapshots at the requested times (hit exactly).
pub fn run(config: &RunConfig) -> Result<RunOutput, SolverError> {
    if !(config.t_final > 0.0) || config.levels.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(SolverError::InvalidConfig("t_final must be positive and levels in (0, 1)".into()));
    }
    if !(config.dt > 0.0 && config.dt_ratio > 0.0 && config.h > 0.0) {
        return Err(SolverError::InvalidConfig("h, dt and dt_ratio must be positive".into()));
    }
    if !(config.startup >= 0.0) {
        return Err(SolverError::InvalidConfig(format!("startup = {} must be non-negative", config.startup)));
    }
    let right = |t: f64| config.initial.l + config.right_margin + config.right_scale * t.sqrt();
    let mut state = init_step(&config.initial, config.h, config.xi_left - config.initial.l, right(0.0))?;
    let mut stops: Vec<f64> = config.snapshots.iter().copied().filter(|&s| s > 0.0 && s <= config.t_final).collect();
    stops.push(config.t_final);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut trace = FrontTrace::default();
    let mut snaps = Vec::new();
    if config.snapshots.contains(&0.0) {
        snaps.push(Snapshot { t: 0.0, xi_left: state.xi_left, h: state.h, v: state.v.clone() });
    }
    let mut steps = 0;
    let mut defect: f64 = 0.0;
    let mut late_excursion: f64 = 0.0;
    for &stop in &stops {
        while state.t < stop * (1.0 - 1e-14) {
            let mut dt = step_size(config, state.t);
            let remaining = stop - state.t;
            if dt >= remaining * (1.0 - 1e-9) {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                dt = 0.5 * remaining;
            }
            state.extend_right(right(state.t + dt));
            state.step(dt, config.scheme)?;
            steps += 1;
            if state.t >= 1.0 {
                defect = defect.max(state.monotonicity_defect());
                late_excursion = late_excursion.max(state.u_values().iter().map(|&u| (-u).max(u - 1.0)).fold(0.0, f64::max));
            }
            if state.t >= config.trace_from {
                for &s in &config.levels {
                    let xi = state.front_xi(s)?;
                    trace.records.push(TraceRecord { t: state.t, level: s, xi });
                }
            }
        }
        state.t = state.t.max(stop).min(stop);
        if config.snapshots.contains(&stop) {
            snaps.push(Snapshot { t: stop, xi_left: state.xi_left, h: state.h, v: state.v.clone() });
        }
    }
    Ok(RunOutput { trace, snapshots: snaps, steps, max_monotonicity_defect: defect,
        max_range_excursion: late_excursion,
        startup_range_excursion: state.range_excursion,
        final_state: state,
     })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_half() {
        assert!((logistic_map(0.5, 0.1) - 0.52497919).abs() < 5e-9);
        assert_eq!(logistic_map(0.0, 1.0), 0.0);
        assert_eq!(logistic_map(1.0, 1.0), 1.0);
    }

    #[test]
    fn penta_solves_spd_system() {
        let n = 30;
        let d: Vec<f64> = (0..n).map(|i| 5.0 + 0.1 * i as f64).collect();
        let (e1, e2) = (-1.3, 0.2);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = d[i] * x[i];
            for (off, e) in [(1usize, e1), (2, e2)] {
                if i >= off {
                    b[i] += e * x[i - off];
                }
                if i + off < n {
                    b[i] += e * x[i + off];
                }
            }
        }
        Penta::factor(&d, e1, e2).solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn symbol_matches_expansion() {
        let h: f64 = 0.02;
        assert!((stencil_symbol(h) - (1.0 - h.powi(4) / 90.0)).abs() < 1e-12);
    }

    #[test]
    fn initial_data_checks() {
        let bad = InitialData { l: 1.0, shape: Shape::Custom(|x| 1.5 - x) };
        assert!(matches!(init_step(&bad, 0.1, -10.0, 10.0), Err(SolverError::InvalidInitialData { .. })));
        assert!(matches!(init_step(&InitialData { l: -1.0, shape: Shape::Step }, 0.1, -10.0, 10.0), Err(SolverError::InvalidConfig(_))));
    }
}
