//! Subcommand definitions and their drivers.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fkpp::fkpp_solver::{run, FrontTrace, InitialData, RunConfig, Scheme, Shape, Snapshot, TraceRecord};
use fkpp::front_lab::{
    build_uapp, compare_profiles, fit_alphas, fit_shift, ledger_from_fit, FitOptions, MuMode, OuterCache,
};
use fkpp::inner_expansion::solve_inner;
use fkpp::outer_expansion::{balance_alpha1, build_v1_plus, build_v3_plus, mu_star, solve_mu_root, OuterSolution};
use fkpp::spectral_halfline::SpectralBasis;
use fkpp::traveling_wave::solve_wave;
use fkpp::universal_constants::{
    arcsin_over_y_integral, claim_closed_form, claim_quadrature, compute_mu, log_cos_integral, series_closed_form, sum_lemma_series,
    theta_prime_psi1,
};

use crate::criteria::{self, Criterion};
use crate::error::CliError;
use crate::output::{csv_error, num, Meta, OutDir};
use crate::params::{check, Params};

#[derive(Debug, Parser)]
#[command(name = "kpp", version, about = "Fisher-KPP front asymptotics: constants, expansions, simulation and fits")]
pub struct Cli {
    /// Output directory (default `$KPP_OUT_DIR/<command>`, else `kpp_out/<command>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` parameter file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// mu* by three routes and the constants feeding it.
    Constants(ConstantsArgs),
    /// Minimal-speed traveling wave.
    Wave(WaveArgs),
    /// Inner correction V1- and the profile psi.
    Inner(WaveArgs),
    /// Outer terms V0+ .. V3+ on a uniform eta grid.
    Outer(OuterArgs),
    /// Integrate the PDE from step data and track level sets.
    Simulate(SimulateArgs),
    /// Sequential shift fit of a simulated trace.
    Fit(FitArgs),
    /// Compare simulated snapshots with phi + psi/t and u_app.
    Compare(CompareArgs),
    /// Emit u_app profiles.
    Uapp(UappArgs),
    /// Run the acceptance criteria.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Wave(_) => "wave",
            Command::Inner(_) => "inner",
            Command::Outer(_) => "outer",
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Compare(_) => "compare",
            Command::Uapp(_) => "uapp",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Series terms.
    #[arg(long)]
    pub terms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x_lo: Option<f64>,
    #[arg(long)]
    pub x_hi: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Emit every n-th grid point.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OuterArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Defaults to the balance value for the given `q3`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q3: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Bdf2,
    Strang,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    Step,
    Ramp,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Base time step, reached after the start-up grading.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Time step grows like `dt_ratio * t`.
    #[arg(long)]
    pub dt_ratio: Option<f64>,
    /// Time scale over which early steps grow from zero to `dt` (0 disables).
    #[arg(long)]
    pub startup: Option<f64>,
    /// Half-width of the initial transition region.
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    #[arg(long)]
    pub scheme: Option<SchemeArg>,
    #[arg(long)]
    pub shape: Option<ShapeArg>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Trace written by `simulate`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub stages: Option<usize>,
    /// `free` or a value to freeze the log t / t coefficient at.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Reuse the stage-4 estimate of b instead of freezing it at -3 sqrt(pi).
    #[arg(long)]
    pub free_sqrt: Option<bool>,
    /// Add a t^-3/2 nuisance column to stages 4 to 6.
    #[arg(long)]
    pub higher_order: Option<bool>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub level: Option<f64>,
    /// Shift-fit window, default the last decade of the trace.
    #[arg(long)]
    pub fit_t_min: Option<f64>,
    #[arg(long)]
    pub fit_t_max: Option<f64>,
    #[arg(long)]
    pub higher_order: Option<bool>,
}

#[derive(Debug, Args)]
pub struct UappArgs {
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// 0 constants, 1 expansions, 2 a t = 1e4 simulation, 3 the t = 1e5 extension.
    #[arg(long)]
    pub tier: Option<u8>,
    /// Value of mu fed to the solvability and ledger checks.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
}

/// Resolve the output directory of a subcommand.
pub fn out_dir(explicit: Option<PathBuf>, command: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let root = std::env::var_os("KPP_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("kpp_out"));
        root.join(command)
    })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut params = Params::load(cli.config.as_deref())?;
    let name = cli.command.name();
    let dir = out_dir(cli.out, name);
    match cli.command {
        Command::Constants(a) => constants(a, &mut params, dir),
        Command::Wave(a) => wave(a, &mut params, dir),
        Command::Inner(a) => inner(a, &mut params, dir),
        Command::Outer(a) => outer(a, &mut params, dir),
        Command::Simulate(a) => simulate(a, &mut params, dir),
        Command::Fit(a) => fit(a, &mut params, dir),
        Command::Compare(a) => compare(a, &mut params, dir),
        Command::Uapp(a) => uapp(a, &mut params, dir),
        Command::Verify(a) => verify(a, &mut params, dir),
    }
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| num(v)).collect()
}

fn constants(a: ConstantsArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let terms: usize = p.pick(a.terms, "terms", fkpp::universal_constants::DEFAULT_TERMS)?;
    std::mem::take(p).finish()?;
    check(terms >= 10, "terms", terms, "at least 10")?;
    let basis = SpectralBasis::standard();
    let report = compute_mu(&basis, terms).map_err(CliError::numerical)?;
    let theta = theta_prime_psi1(&basis, terms).map_err(CliError::numerical)?;
    let (s, tail) = sum_lemma_series(terms);
    let mut rows: Vec<(String, f64, &str, f64, bool)> = vec![
        ("mu".into(), report.mu_closed, "closed form 9/8(5-6log2)", 0.0, true),
        ("mu".into(), report.mu_series, "series", 1e-5, (report.mu_series - report.mu_closed).abs() < 1e-5),
        ("mu".into(), report.mu_root, "solvability root", 1e-5, (report.mu_root - report.mu_closed).abs() < 1e-5),
        ("theta_prime_psi1".into(), theta.series, "series", 0.0, true),
        ("theta_prime_psi1".into(), theta.quadrature, "Dirichlet solve + quadrature", 1e-5, (theta.series - theta.quadrature).abs() < 1e-5),
        ("series_sum".into(), s + tail, "partial sum + tail", 1e-8, (s + tail - series_closed_form()).abs() < 1e-8),
        ("series_sum".into(), series_closed_form(), "closed form pi/2(2log2-1)", 0.0, true),
        ("arcsin_integral".into(), arcsin_over_y_integral(), "quadrature", 1e-10, (arcsin_over_y_integral() - PI / 2.0 * 2f64.ln()).abs() < 1e-10),
        ("log_cos_integral".into(), log_cos_integral(), "quadrature", 1e-9, (log_cos_integral() + PI * 2f64.ln()).abs() < 1e-9),
    ];
    for k in 0..=10 {
        let q = claim_quadrature(&basis, k);
        rows.push((format!("claim_{k}"), q, "quadrature", 1e-10, (q - claim_closed_form(k)).abs() < 1e-10));
    }
    let out = OutDir::create(dir)?;
    let all = rows.iter().all(|r| r.4);
    out.csv(
        "constants.csv",
        &["name", "value", "route", "tolerance", "pass"],
        rows.iter().map(|(n, v, r, t, ok)| vec![n.clone(), num(*v), r.to_string(), num(*t), ok.to_string()]),
    )?;
    let mut m = Meta::new("constants");
    m.add("terms", terms).add("tail_estimate", num(tail)).add("max_discrepancy", num(report.max_discrepancy()));
    out.meta(&m.0)?;
    println!("mu* = {:.12} (series {:.12}, root {:.12})", report.mu_closed, report.mu_series, report.mu_root);
    if all {
        Ok(())
    } else {
        Err(CliError::Numerical("a constant missed its tolerance; see constants.csv".into()))
    }
}

fn wave_params(a: &WaveArgs, p: &mut Params) -> Result<(f64, f64, f64, usize), CliError> {
    let x_lo = p.pick(a.x_lo, "x-lo", -30.0)?;
    let x_hi = p.pick(a.x_hi, "x-hi", 50.0)?;
    let h = p.pick(a.h, "h", 0.005)?;
    let stride = p.pick(a.stride, "stride", 20)?;
    check(x_lo <= -20.0, "x-lo", x_lo, "<= -20")?;
    check(x_hi >= 30.0, "x-hi", x_hi, ">= 30")?;
    check(h > 0.0 && h <= 0.01, "h", h, "in (0, 0.01]")?;
    check(stride >= 1, "stride", stride, ">= 1")?;
    Ok((x_lo, x_hi, h, stride))
}

fn wave(a: WaveArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let (x_lo, x_hi, h, stride) = wave_params(&a, p)?;
    std::mem::take(p).finish()?;
    let w = solve_wave(x_lo, x_hi, h).map_err(CliError::numerical)?;
    let out = OutDir::create(dir)?;
    out.csv(
        "wave.csv",
        &["x", "phi", "dphi", "v0minus"],
        (0..w.len()).step_by(stride).map(|i| row(&[w.x(i), w.phi_at(i), w.dphi_at(i), w.v[i]])),
    )?;
    let mut m = Meta::new("wave");
    m.add("x_lo", x_lo).add("x_hi", x_hi).add("h", h).add("stride", stride);
    m.add("k", num(w.k)).add("amplitude", num(w.amplitude)).add("omega", num(w.omega));
    m.add("ode_residual", num(w.ode_residual())).add("left_tail_rate", num(w.left_tail_rate()));
    out.meta(&m.0)?;
    println!("k = {:.10}, A = {:.8}, omega = {:.4}", w.k, w.amplitude, w.omega);
    Ok(())
}

fn inner(a: WaveArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let (x_lo, x_hi, h, stride) = wave_params(&a, p)?;
    std::mem::take(p).finish()?;
    let w = solve_wave(x_lo, x_hi, h).map_err(CliError::numerical)?;
    let t = solve_inner(&w).map_err(CliError::numerical)?;
    let psi = t.psi_samples();
    let out = OutDir::create(dir)?;
    out.csv("inner.csv", &["x", "v1minus", "psi"], (0..w.len()).step_by(stride).map(|i| row(&[w.x(i), t.v1[i], psi[i]])))?;
    let mut m = Meta::new("inner");
    m.add("x_lo", x_lo).add("x_hi", x_hi).add("h", h).add("stride", stride);
    m.add("C1_minus", num(t.c1_minus)).add("tail_window", format!("{},{}", t.window.0, t.window.1));
    m.add("tail_cubic", num(t.tail[0])).add("tail_quadratic", num(t.tail[1])).add("c0_removed", num(t.c0_removed));
    out.meta(&m.0)?;
    println!("C1_minus = {:.10}", t.c1_minus);
    Ok(())
}

fn outer(a: OuterArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let mu = p.pick(a.mu, "mu", mu_star())?;
    let q3 = p.pick(a.q3, "q3", 0.0)?;
    let alpha1 = p.pick_opt(a.alpha1, "alpha1")?;
    let eta_max = p.pick(a.eta_max, "eta-max", 10.0)?;
    let points = p.pick(a.points, "points", 201)?;
    std::mem::take(p).finish()?;
    check(eta_max > 0.0 && eta_max <= 19.0, "eta-max", eta_max, "in (0, 19]")?;
    check(points >= 2, "points", points, ">= 2")?;
    let basis = SpectralBasis::standard();
    let v1 = build_v1_plus(&basis).map_err(CliError::numerical)?;
    let bar = build_v3_plus(&basis, mu, 0.0, 0.0, &v1).map_err(CliError::numerical)?;
    let c1 = solve_inner(&fkpp::traveling_wave::standard_wave()).map_err(CliError::numerical)?.c1_minus;
    let alpha1 = alpha1.unwrap_or_else(|| balance_alpha1(bar.bar_slope, c1, q3));
    let sol = OuterSolution::build(&basis, mu, alpha1, q3).map_err(CliError::numerical)?;
    let out = OutDir::create(dir)?;
    let etas: Vec<f64> = (0..points).map(|i| eta_max * i as f64 / (points - 1) as f64).collect();
    for (name, term) in [("v0", &sol.v0), ("v1", &sol.v1), ("v2", &sol.v2), ("v3", &sol.v3.term)] {
        let mut rows = Vec::new();
        for &e in &etas {
            rows.push(row(&[e, basis.value_at(&term.function, e).map_err(CliError::numerical)?]));
        }
        out.csv(&format!("outer_{name}.csv"), &["eta", "value"], rows)?;
    }
    let proj = basis.projection_onto(&sol.v1.function, 1).map_err(CliError::numerical)?;
    let mu_root = solve_mu_root(&basis, &v1).map_err(CliError::numerical)?;
    let summary = [
        ("v1_slope_0", sol.v1.derivs_at_zero[0]),
        ("v1_curvature_0", sol.v1.derivs_at_zero[1]),
        ("v2_slope_0", sol.v2.derivs_at_zero[0]),
        ("v3_slope_0", sol.v3.term.derivs_at_zero[0]),
        ("v3bar_slope_0", bar.bar_slope),
        ("v1_psi1_projection", proj),
        ("mu_root", mu_root),
        ("alpha1", alpha1),
        ("q3", q3),
        ("C1_minus", c1),
    ];
    out.csv("outer_summary.csv", &["key", "value"], summary.iter().map(|(k, v)| vec![k.to_string(), num(*v)]))?;
    let mut m = Meta::new("outer");
    m.add("mu", num(mu)).add("alpha1", num(alpha1)).add("q3", num(q3)).add("eta_max", eta_max).add("points", points);
    out.meta(&m.0)?;
    for (k, v) in summary {
        println!("{k} = {v:.10}");
    }
    Ok(())
}

fn simulate(a: SimulateArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let d = RunConfig::default();
    let t_final = p.pick(a.t_final, "t-final", d.t_final)?;
    let levels = p.pick_list(a.levels, "levels", d.levels.clone())?;
    let h = p.pick(a.h, "h", d.h)?;
    let dt = p.pick(a.dt, "dt", d.dt)?;
    let dt_ratio = p.pick(a.dt_ratio, "dt-ratio", d.dt_ratio)?;
    let startup = p.pick(a.startup, "startup", d.startup)?;
    let l = p.pick(a.l, "L", 0.0)?;
    let snapshots = p.pick_list(a.snapshots, "snapshots", Vec::new())?;
    let scheme_name: String = p.pick(a.scheme.map(|s| format!("{s:?}").to_lowercase()), "scheme", "bdf2".into())?;
    let shape_name: String = p.pick(a.shape.map(|s| format!("{s:?}").to_lowercase()), "shape", "step".into())?;
    std::mem::take(p).finish()?;
    check(t_final > 0.0 && t_final <= 1e6, "t-final", t_final, "in (0, 1e6]")?;
    check(!levels.is_empty() && levels.iter().all(|&s| s > 0.0 && s < 1.0), "levels", format!("{levels:?}"), "values in (0, 1)")?;
    check(h > 0.0 && h <= 0.2, "h", h, "in (0, 0.2]")?;
    check(dt > 0.0 && dt <= 1.0, "dt", dt, "in (0, 1]")?;
    check(dt_ratio > 0.0 && dt_ratio <= 0.1, "dt-ratio", dt_ratio, "in (0, 0.1]")?;
    check((0.0..=1.0).contains(&startup), "startup", startup, "in [0, 1]")?;
    check((0.0..=50.0).contains(&l), "L", l, "in [0, 50]")?;
    check(snapshots.iter().all(|&s| s > 0.0 && s <= t_final), "snapshots", format!("{snapshots:?}"), "times in (0, t-final]")?;
    let scheme = match scheme_name.as_str() {
        "bdf2" => Scheme::Bdf2,
        "strang" => Scheme::Strang,
        other => return Err(CliError::Usage(format!("--scheme {other}: expected bdf2 or strang"))),
    };
    let shape = match shape_name.as_str() {
        "step" => Shape::Step,
        "ramp" if l > 0.0 => Shape::Ramp,
        "ramp" => return Err(CliError::Usage("--shape ramp needs --L > 0".into())),
        other => return Err(CliError::Usage(format!("--shape {other}: expected step or ramp"))),
    };
    let config = RunConfig { t_final, levels: levels.clone(), h, dt, dt_ratio, startup, initial: InitialData { l, shape }, snapshots, scheme, ..d };
    let start = Instant::now();
    let result = run(&config).map_err(CliError::numerical)?;
    let seconds = start.elapsed().as_secs_f64();
    let out = OutDir::create(dir)?;
    out.csv(
        "trace.csv",
        &["t", "level", "sigma", "xi"],
        result.trace.records.iter().map(|r| row(&[r.t, r.level, r.sigma(), r.xi])),
    )?;
    for s in &result.snapshots {
        let offset = 2.0 * s.t;
        out.csv(
            &format!("snapshot_{}.csv", s.t),
            &["x", "u", "v"],
            (0..s.v.len()).map(|i| row(&[s.xi(i) + offset, s.u(i), s.v[i]])),
        )?;
    }
    let mut m = Meta::new("simulate");
    m.add("t_final", t_final).add("levels", join(&levels)).add("h", h).add("dt", dt).add("dt_ratio", dt_ratio).add("startup", startup).add("L", l);
    m.add("scheme", scheme_name).add("shape", shape_name).add("snapshots", join(&config.snapshots));
    m.add("xi_left", config.xi_left).add("right_scale", config.right_scale).add("right_margin", config.right_margin);
    m.add("steps", result.steps).add("max_monotonicity_defect", num(result.max_monotonicity_defect));
    m.add("max_range_excursion", num(result.max_range_excursion)).add("startup_range_excursion", num(result.startup_range_excursion));
    m.add("seconds", format!("{seconds:.2}"));
    out.meta(&m.0)?;
    for &s in &levels {
        if let Some(&(t, xi)) = result.trace.series(s).last() {
            println!("level {s}: sigma({t}) - 2t = {xi:.8}");
        }
    }
    println!("{} steps in {seconds:.1} s", result.steps);
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Read `trace.csv` (`t, level, sigma[, xi]`).
pub fn read_trace(path: &Path) -> Result<FrontTrace, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (ti, li, si) = match (col("t"), col("level"), col("sigma")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(CliError::bad_input(path, "expected columns t, level, sigma")),
    };
    let xi_col = col("xi");
    let mut records = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let get = |i: usize| -> Result<f64, CliError> {
            rec.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| CliError::bad_input(path, format!("row {}: bad number", n + 2)))
        };
        let t = get(ti)?;
        let xi = match xi_col {
            Some(i) => get(i)?,
            None => get(si)? - 2.0 * t,
        };
        records.push(TraceRecord { t, level: get(li)?, xi });
    }
    if records.is_empty() {
        return Err(CliError::bad_input(path, "empty trace"));
    }
    Ok(FrontTrace { records })
}

/// Read `snapshot_<t>.csv` (`x, u[, v]`) on a uniform grid.
pub fn read_snapshot(path: &Path, t: f64) -> Result<Snapshot, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let xc = col("x").ok_or_else(|| CliError::bad_input(path, "missing column x"))?;
    let uc = col("u");
    let vc = col("v");
    if uc.is_none() && vc.is_none() {
        return Err(CliError::bad_input(path, "missing column u"));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let get = |i: usize| -> Result<f64, CliError> {
            rec.get(i).and_then(|s| s.trim().parse().ok()).ok_or_else(|| CliError::bad_input(path, format!("row {}: bad number", n + 2)))
        };
        let x = get(xc)?;
        // v = e^xi u with xi = x - 2t; prefer the stored v, which does not underflow.
        let v = match vc {
            Some(i) => get(i)?,
            None => (x - 2.0 * t).exp() * get(uc.unwrap_or(xc))?,
        };
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 3 {
        return Err(CliError::bad_input(path, "fewer than three grid points"));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(CliError::bad_input(path, "grid is not uniform"));
    }
    Ok(Snapshot { t, xi_left: xs[0] - 2.0 * t, h, v: vs })
}

/// Snapshot files in a run directory, sorted by time.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(f64, PathBuf)>, CliError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(t) = name.strip_prefix("snapshot_").and_then(|s| s.strip_suffix(".csv")).and_then(|s| s.parse::<f64>().ok()) {
            out.push((t, entry.path()));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn parse_mu_mode(s: &str) -> Result<MuMode, CliError> {
    if s.eq_ignore_ascii_case("free") {
        Ok(MuMode::Free)
    } else if s.eq_ignore_ascii_case("star") {
        Ok(MuMode::Frozen(mu_star()))
    } else {
        s.parse().map(MuMode::Frozen).map_err(|_| CliError::Usage(format!("--mu {s}: expected free, star or a number")))
    }
}

fn fit(a: FitArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let d = FitOptions::default();
    let trace_path = p.pick_opt(a.trace, "trace")?;
    let level = p.pick(a.level, "level", 0.5)?;
    let t_min = p.pick(a.t_min, "t-min", d.t_min)?;
    let t_max = p.pick(a.t_max, "t-max", d.t_max)?;
    let stages = p.pick(a.stages, "stages", d.stages)?;
    let mu: String = p.pick(a.mu, "mu", "free".into())?;
    let free_sqrt = p.pick(a.free_sqrt, "free-sqrt", false)?;
    let higher_order = p.pick(a.higher_order, "higher-order", false)?;
    let threshold = p.pick(a.threshold, "threshold", d.condition_threshold)?;
    std::mem::take(p).finish()?;
    let trace_path = trace_path.ok_or_else(|| CliError::Usage("missing required flag --trace".into()))?;
    check(level > 0.0 && level < 1.0, "level", level, "in (0, 1)")?;
    check(t_min > 0.0 && t_max > t_min, "t-max", t_max, "greater than --t-min > 0")?;
    check((1..=6).contains(&stages), "stages", stages, "1..=6")?;
    check(threshold > 0.0, "threshold", threshold, "positive")?;
    let mu_mode = parse_mu_mode(&mu)?;
    let trace = read_trace(&trace_path)?;
    let opts = FitOptions { t_min, t_max, stages, freeze_sqrt: !free_sqrt, mu: mu_mode, higher_order, condition_threshold: threshold, ..d };
    let report = fit_shift(&trace, level, &opts).map_err(CliError::numerical)?;
    let out = OutDir::create(dir)?;
    let mut rows = Vec::new();
    for s in &report.stages {
        for (name, v) in &s.coeffs {
            rows.push(vec![s.stage.to_string(), s.name.to_string(), name.to_string(), num(*v), num(s.rms), num(s.condition)]);
        }
    }
    out.csv("fit_report.csv", &["stage", "stage_name", "coefficient", "value", "rms", "condition"], rows)?;
    let mut m = Meta::new("fit");
    m.add("trace", trace_path.display()).add("level", level).add("t_min", report.t_min).add("t_max", report.t_max);
    m.add("samples", report.samples).add("stages", stages).add("mu", mu).add("free_sqrt", free_sqrt).add("higher_order", higher_order);
    m.add("rms_decreasing", report.rms_decreasing());
    out.meta(&m.0)?;
    let show = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            println!("{name} = {v:.8}");
        }
    };
    show("speed", report.speed);
    show("log_coeff", report.log_coeff);
    show("constant", report.constant);
    show("sqrt_coeff", report.sqrt_coeff);
    show("mu", report.mu);
    show("inv_t", report.inv_t);
    Ok(())
}

fn compare(a: CompareArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let run_dir = p.pick_opt(a.run, "run")?;
    let mu = p.pick(a.mu, "mu", mu_star())?;
    let eps = p.pick(a.eps, "eps", 0.05)?;
    let level = p.pick(a.level, "level", 0.5)?;
    let fit_t_min = p.pick_opt(a.fit_t_min, "fit-t-min")?;
    let fit_t_max = p.pick_opt(a.fit_t_max, "fit-t-max")?;
    let higher_order = p.pick(a.higher_order, "higher-order", true)?;
    std::mem::take(p).finish()?;
    let run_dir = run_dir.ok_or_else(|| CliError::Usage("missing required flag --run".into()))?;
    check(eps > 0.0 && eps < 0.125, "eps", eps, "in (0, 1/8)")?;
    check(level > 0.0 && level < 1.0, "level", level, "in (0, 1)")?;
    let trace = read_trace(&run_dir.join("trace.csv"))?;
    let t_last = trace.series(level).last().map(|r| r.0).ok_or_else(|| CliError::Usage(format!("--level {level}: not in the trace")))?;
    let t_max = fit_t_max.unwrap_or(t_last);
    let t_min = fit_t_min.unwrap_or(t_max / 10.0);
    check(t_min > 0.0 && t_max > t_min, "fit-t-max", t_max, "greater than --fit-t-min > 0")?;
    let wave = fkpp::traveling_wave::standard_wave();
    let inner = solve_inner(&wave).map_err(CliError::numerical)?;
    let basis = SpectralBasis::standard();
    let v1 = build_v1_plus(&basis).map_err(CliError::numerical)?;
    let bar = build_v3_plus(&basis, mu_star(), 0.0, 0.0, &v1).map_err(CliError::numerical)?.bar_slope;
    let shift = fit_alphas(&trace, &inner, level, t_min, t_max, mu, higher_order).map_err(CliError::numerical)?;
    let ledger = ledger_from_fit(&shift, &inner, bar);
    // The outer terms exist only where the resonant equation is solvable.
    let cache = match OuterSolution::build(&basis, mu, ledger.alpha1(), ledger.q3) {
        Ok(sol) => Some(OuterCache::new(&basis, &sol).map_err(CliError::numerical)?),
        Err(e) => {
            eprintln!("note: no u_app for mu = {mu}: {e}");
            None
        }
    };
    let mut rows = Vec::new();
    for (t, path) in list_snapshots(&run_dir)? {
        let snap = read_snapshot(&path, t)?;
        let glued = match &cache {
            Some(c) if t >= 3.0 => build_uapp(&inner, c, eps, t).ok(),
            _ => None,
        };
        let r = compare_profiles(&snap, &inner, shift.xi(t), glued.as_ref()).map_err(CliError::numerical)?;
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let g = glued.as_ref();
        rows.push(vec![
            num(t),
            num(r.local_error),
            opt(r.weighted_error),
            opt(g.map(|g| g.zeta)),
            opt(g.map(|g| g.k_jump)),
            opt(g.and_then(|g| g.continuity_jump().ok())),
            opt(g.and_then(|g| g.derivative_jump_after().ok())),
        ]);
        println!("t = {t}: local {:.4e}, weighted {}", r.local_error, opt(r.weighted_error));
    }
    if rows.is_empty() {
        return Err(CliError::bad_input(&run_dir, "no snapshot_<t>.csv files"));
    }
    let out = OutDir::create(dir)?;
    out.csv("compare.csv", &["t", "local_error", "weighted_error", "zeta", "k_jump", "continuity_jump", "derivative_jump"], rows)?;
    let mut m = Meta::new("compare");
    m.add("run", run_dir.display()).add("mu", num(mu)).add("eps", eps).add("level", level).add("fit_t_min", t_min).add("fit_t_max", t_max);
    m.add("higher_order", higher_order).add("alpha0", num(shift.alpha0)).add("alpha1", num(shift.alpha1)).add("t32_coeff", num(shift.higher));
    m.add("q3", num(ledger.q3));
    out.meta(&m.0)?;
    Ok(())
}

fn uapp(a: UappArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let times = p.pick_list(a.times, "times", vec![1e2, 1e3, 1e4])?;
    let eps = p.pick(a.eps, "eps", 0.05)?;
    let mu = p.pick(a.mu, "mu", mu_star())?;
    let q3 = p.pick(a.q3, "q3", 0.0)?;
    let x_min = p.pick(a.x_min, "x-min", -10.0)?;
    let x_max = p.pick(a.x_max, "x-max", 30.0)?;
    let step = p.pick(a.step, "step", 0.05)?;
    std::mem::take(p).finish()?;
    check(!times.is_empty() && times.iter().all(|&t| t >= 3.0), "times", format!("{times:?}"), "values >= 3")?;
    check(eps > 0.0 && eps < 0.125, "eps", eps, "in (0, 1/8)")?;
    check(x_max > x_min && step > 0.0 && (x_max - x_min) / step <= 1e6, "step", step, "positive with at most 1e6 points")?;
    let inner = solve_inner(&fkpp::traveling_wave::standard_wave()).map_err(CliError::numerical)?;
    let basis = SpectralBasis::standard();
    let v1 = build_v1_plus(&basis).map_err(CliError::numerical)?;
    let bar = build_v3_plus(&basis, mu, 0.0, 0.0, &v1).map_err(CliError::numerical)?.bar_slope;
    let alpha1 = balance_alpha1(bar, inner.c1_minus, q3);
    let sol = OuterSolution::build(&basis, mu, alpha1, q3).map_err(CliError::numerical)?;
    let cache = OuterCache::new(&basis, &sol).map_err(CliError::numerical)?;
    let n = ((x_max - x_min) / step).round() as usize;
    let mut rows = Vec::new();
    let mut meta = Meta::new("uapp");
    for &t in &times {
        let g = build_uapp(&inner, &cache, eps, t).map_err(CliError::numerical)?;
        for i in 0..=n {
            let x = x_min + i as f64 * step;
            let y = x + inner.wave.k;
            let (v, _) = g.v_app(y).map_err(CliError::numerical)?;
            rows.push(row(&[t, x, (-x).exp() * v, y, v]));
        }
        meta.add(&format!("zeta_{t}"), num(g.zeta)).add(&format!("k_jump_{t}"), num(g.k_jump));
        println!("t = {t}: zeta = {:.6e}, K = {:.6e}, match y = {:.4}", g.zeta, g.k_jump, g.match_y);
    }
    let out = OutDir::create(dir)?;
    out.csv("uapp.csv", &["t", "x", "u_app", "y", "v_app"], rows)?;
    meta.add("times", join(&times)).add("eps", eps).add("mu", num(mu)).add("q3", num(q3)).add("alpha1", num(alpha1));
    meta.add("k", num(inner.wave.k)).add("x_min", x_min).add("x_max", x_max).add("step", step);
    out.meta(&meta.0)?;
    Ok(())
}

fn verify(a: VerifyArgs, p: &mut Params, dir: PathBuf) -> Result<(), CliError> {
    let tier = p.pick(a.tier, "tier", 1)?;
    let mu = p.pick(a.mu, "mu", mu_star())?;
    std::mem::take(p).finish()?;
    check(tier <= 3, "tier", tier, "0..=3")?;
    check(mu.is_finite(), "mu", mu, "a finite number")?;
    let results = criteria::run_tier(tier, mu).map_err(CliError::numerical)?;
    for c in &results {
        println!("{c}");
    }
    let out = OutDir::create(dir)?;
    let mut rows = Vec::new();
    for c in &results {
        for k in &c.checks {
            rows.push(vec![c.id.to_string(), c.title.to_string(), k.name.clone(), num(k.value), k.bound.clone(), k.passed.to_string()]);
        }
    }
    out.csv("verify.csv", &["criterion", "title", "check", "value", "bound", "pass"], rows)?;
    let mut m = Meta::new("verify");
    m.add("tier", tier).add("mu", num(mu));
    let passed = results.iter().filter(|c| c.passed()).count();
    m.add("passed", passed).add("total", results.len());
    out.meta(&m.0)?;
    println!("{passed}/{} criteria pass", results.len());
    match results.iter().find(|c: &&Criterion| !c.passed()) {
        None => Ok(()),
        Some(c) => {
            let what = c.first_failure().map(|k| k.name.clone()).unwrap_or_default();
            Err(CliError::Numerical(format!("criterion {} ({}) failed at {what}", c.id, c.title)))
        }
    }
}
