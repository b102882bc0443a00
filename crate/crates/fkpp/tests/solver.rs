use fkpp::fkpp_solver::*;
use fkpp::traveling_wave::standard_wave;
use proptest::prelude::*;

fn xi_at(config: &RunConfig, times: &[f64]) -> Vec<f64> {
    let out = run(config).unwrap();
    times.iter().map(|&t| out.trace.xi_at(0.5, t).unwrap()).collect()
}

fn order(a: f64, b: f64, c: f64) -> f64 {
    ((a - b) / (b - c)).abs().log2()
}

/// Orders from three runs refined by 2, at each sampled time.
fn orders(configs: [RunConfig; 3], times: &[f64]) -> Vec<f64> {
    let v: Vec<Vec<f64>> = configs.iter().map(|c| xi_at(c, times)).collect();
    (0..times.len()).map(|j| order(v[0][j], v[1][j], v[2][j])).collect()
}

const TIMES: [f64; 3] = [5.0, 20.0, 50.0];

#[test]
fn second_order_in_space() {
    let cfg = |h: f64| RunConfig { t_final: 50.0, h, dt: 0.0025, dt_ratio: 0.0005, ..Default::default() };
    for (t, p) in TIMES.iter().zip(orders([cfg(0.1), cfg(0.05), cfg(0.025)], &TIMES)) {
        assert!(p >= 1.9, "order {p} at t = {t}");
    }
}

#[test]
fn second_order_in_time() {
    let cfg = |dt: f64| RunConfig { t_final: 50.0, h: 0.02, dt, dt_ratio: dt / 5.0, ..Default::default() };
    for (t, p) in TIMES.iter().zip(orders([cfg(0.02), cfg(0.01), cfg(0.005)], &TIMES)) {
        assert!(p >= 1.9, "order {p} at t = {t}");
    }
}

#[test]
fn default_run_stays_in_range_and_monotone() {
    let out = run(&RunConfig { t_final: 100.0, levels: vec![0.1, 0.5, 0.9], snapshots: vec![10.0, 100.0], ..Default::default() }).unwrap();
    assert!(out.max_range_excursion < 1e-12, "{:e}", out.max_range_excursion);
    assert!(out.startup_range_excursion < RANGE_TOLERANCE);
    assert!(out.max_monotonicity_defect < 1e-12, "{:e}", out.max_monotonicity_defect);
    // sigma_s decreasing in s, and the speed is close to 2.
    for t in [10.0, 50.0, 100.0] {
        let x: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|&s| out.trace.xi_at(s, t).unwrap()).collect();
        assert!(x[0] > x[1] && x[1] > x[2], "t = {t}: {x:?}");
    }
    // sigma/t itself is about 1.91 at t = 100 (the log t and alpha_0 terms
    // are still O(10)); the secant speed is the meaningful check.
    let s = out.trace.sigma_series(0.5);
    let (t1, s1) = s[s.len() - 1];
    let s0 = out.trace.xi_at(0.5, 50.0).unwrap() + 100.0;
    assert!(((s1 - s0) / (t1 - 50.0) - 2.0).abs() < 0.05);
    // sigma_0.5 strictly increasing past the transient.
    assert!(s.windows(2).filter(|w| w[0].0 >= 2.0).all(|w| w[1].1 > w[0].1));
    assert_eq!(out.snapshots.len(), 2);
    assert_eq!(out.snapshots[1].t, 100.0);
}

#[test]
fn widening_the_window_is_harmless() {
    let base = RunConfig { t_final: 1000.0, ..Default::default() };
    let wide = RunConfig { right_margin: base.right_margin + 10.0, ..base.clone() };
    let a = xi_at(&base, &[1000.0])[0];
    let b = xi_at(&wide, &[1000.0])[0];
    assert!((a - b).abs() < 1e-6, "{:e}", a - b);
}

#[test]
fn strang_agrees_with_bdf2_at_small_steps() {
    let bdf = RunConfig { t_final: 20.0, dt: 0.0025, dt_ratio: 0.0005, ..Default::default() };
    let strang = RunConfig { scheme: Scheme::Strang, ..bdf.clone() };
    let out = run(&strang).unwrap();
    assert!(out.max_range_excursion < 1e-12);
    let d = xi_at(&bdf, &[20.0])[0] - out.trace.xi_at(0.5, 20.0).unwrap();
    assert!(d.abs() < 1e-3, "{d:e}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = [
        RunConfig { t_final: 0.0, ..Default::default() },
        RunConfig { levels: vec![1.0], ..Default::default() },
        RunConfig { h: -0.1, ..Default::default() },
        RunConfig { startup: -1.0, ..Default::default() },
    ];
    for c in bad {
        assert!(matches!(run(&c), Err(SolverError::InvalidConfig(_))));
    }
}

#[test]
fn crossing_outside_the_data_is_an_error() {
    let u = vec![1.0, 0.9, 0.8];
    assert!(matches!(front_crossing(0.0, 0.1, &u, 0.5), Err(SolverError::LevelNotBracketed { .. })));
    assert!(front_crossing(0.0, 0.1, &u, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crossing_of_a_translated_wave(a in -5.0f64..5.0) {
        let w = standard_wave();
        let h = 0.02;
        let x0 = -20.0;
        let u: Vec<f64> = (0..2001).map(|i| w.phi(x0 + i as f64 * h - a)).collect();
        let x = front_crossing(x0, h, &u, w.phi(0.0)).unwrap();
        prop_assert!((x - a).abs() < 1e-6, "{:e}", x - a);
    }

    /// Against a brute-force scan: the bracket found is the rightmost one.
    #[test]
    fn rightmost_crossing(bump_at in 5usize..190, width in 2usize..8, s in 0.2f64..0.8) {
        let h = 0.1;
        let mut u: Vec<f64> = (0..200).map(|i| 1.0 / (1.0 + ((i as f64 - 50.0) * h).exp())).collect();
        for (i, v) in u.iter_mut().enumerate() {
            let d = (i as f64 - bump_at as f64) / width as f64;
            *v = (*v + 0.95 * (-d * d).exp()).min(1.0);
        }
        let x = front_crossing(0.0, h, &u, s).unwrap();
        let last = (0..u.len() - 1).rev().find(|&i| (u[i] - s) * (u[i + 1] - s) <= 0.0 && u[i] != u[i + 1]).unwrap();
        prop_assert!(x >= last as f64 * h - 1e-12 && x <= (last + 1) as f64 * h + 1e-12);
    }

    #[test]
    fn logistic_map_is_a_flow_on_the_unit_interval(u in 0.0f64..=1.0, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let once = logistic_map(u, a + b);
        prop_assert!((0.0..=1.0).contains(&once));
        prop_assert!((logistic_map(logistic_map(u, a), b) - once).abs() < 1e-14);
    }
}
