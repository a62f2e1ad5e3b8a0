use hunter_saxton::eulerian::{self, EulerianConfig};
use hunter_saxton::experiments::illposed::{self, IllposedDatumSpec};
use hunter_saxton::experiments::scenarios::{self, UcWindow};
use hunter_saxton::experiments::{Datum, Verdict};
use hunter_saxton::grid::{Grid, LineFunction};
use hunter_saxton::lagrangian::Forcing;
use hunter_saxton::littlewood_paley::build_widest_filter_bank;

fn standard_grid() -> Grid {
    Grid::new(12.0, 4096).unwrap()
}

fn assertion_of(v: &Verdict) -> &str {
    match v {
        Verdict::Pass => "",
        Verdict::Fail { assertion, .. } | Verdict::Inapplicable { assertion, .. } => assertion,
    }
}

#[test]
fn test_conservation_zero_datum_is_exact() {
    let r = scenarios::run_conservation(&Datum::Zero, Grid::new(12.0, 1024).unwrap(), 1.0).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.estimates["lagrangian_drift"], 0.0);
    assert_eq!(r.estimates["eulerian_drift"], 0.0);
}

#[test]
fn test_conservation_of_gaussian_antiderivative() {
    let r = scenarios::run_conservation(&Datum::default(), standard_grid(), 5.0).unwrap();
    assert!(r.verdict.is_pass(), "{:?}", r.verdict);
    let expected = (std::f64::consts::PI / 2.0).sqrt();
    assert!((r.estimates["h1_squared_initial"] - expected).abs() / expected < 1e-6);
    assert!(r.series_aligned());
}

#[test]
fn test_conservation_until_blowup_fraction() {
    let datum = Datum::Blowup { amplitude: 1.0 };
    let r = scenarios::run_conservation(&datum, standard_grid(), 1.8).unwrap();
    assert!(r.estimates["lagrangian_drift"] <= 1e-6);
    let r = scenarios::run_conservation(&datum, standard_grid(), 2.5).unwrap();
    assert_eq!(r.verdict.exit_code(), 3);
}

#[test]
fn test_global_guard_and_scaled_datum() {
    let r =
        scenarios::run_global(&Datum::Gaussian { amplitude: 1.0 }, standard_grid(), 10.0).unwrap();
    assert_eq!(assertion_of(&r.verdict), "global.hypotheses");
    assert_eq!(r.verdict.exit_code(), 3);
    let r =
        scenarios::run_global(&Datum::Blowup { amplitude: 1.0 }, standard_grid(), 10.0).unwrap();
    assert_eq!(r.verdict.exit_code(), 3);

    let r = scenarios::run_global(
        &Datum::GaussianAntiderivative { scale: 0.5 },
        standard_grid(),
        10.0,
    )
    .unwrap();
    assert!(r.verdict.is_pass(), "{:?}", r.verdict);
    assert!((r.estimates["u0x_sup"] - 0.5).abs() < 1e-4);
    assert!(r.check("global.slope_bound").unwrap().value <= 0.5 * (1.0 + 1e-3));
}

#[test]
fn test_blowup_guard_and_scaled_datum() {
    let r = scenarios::run_blowup(&Datum::default(), standard_grid()).unwrap();
    assert_eq!(assertion_of(&r.verdict), "blowup.negative_slope");
    assert_eq!(r.verdict.exit_code(), 3);

    let r = scenarios::run_blowup(
        &Datum::Blowup { amplitude: 2.0 },
        Grid::new(5.5, 32768).unwrap(),
    )
    .unwrap();
    assert!((r.estimates["t_star"] - 1.0).abs() < 1e-12);
    assert!((r.estimates["min_slope"] + 2.0).abs() < 1e-12);
    assert!(r.check("blowup.riccati_trace").unwrap().passed);
    assert!(r.check("blowup.halted").unwrap().passed);
    let halt = r.estimates["halt_time"];
    assert!(halt > 0.8 && halt <= 1.0, "halt {halt}");
}

#[test]
fn test_illposed_slope_grows_with_cut() {
    let grid = standard_grid();
    let bank = build_widest_filter_bank(grid).unwrap();
    let spec = IllposedDatumSpec {
        epsilon: 0.1,
        r: 2.0,
        p: 2.0,
        n_cut: 2,
        k_max: 8,
    };
    let search = illposed::search_cut(spec, &bank, grid).unwrap();
    assert_eq!(search.slopes.len(), illposed::max_term(&grid));
    let slopes: Vec<f64> = search.slopes.iter().map(|s| s.1).collect();
    assert!(slopes.iter().all(|&s| s < 0.0));
    assert!(slopes.windows(2).all(|w| w[1] < w[0]), "{slopes:?}");
}

#[test]
fn test_illposed_epsilon_scaling_is_linear() {
    let grid = standard_grid();
    let bank = build_widest_filter_bank(grid).unwrap();
    let spec = IllposedDatumSpec {
        epsilon: 0.1,
        r: 2.0,
        p: 2.0,
        n_cut: 6,
        k_max: 8,
    };
    let a = illposed::build_illposed_datum(spec, &bank, grid).unwrap();
    let b = illposed::build_illposed_datum(
        IllposedDatumSpec {
            epsilon: 0.2,
            ..spec
        },
        &bank,
        grid,
    )
    .unwrap();
    let scale = a.datum.sup();
    for (x, y) in a.datum.values().iter().zip(b.datum.values()) {
        assert!((2.0 * x - y).abs() <= 1e-12 * scale);
    }
    assert!((2.0 * a.slope_at_zero - b.slope_at_zero).abs() <= 1e-12 * a.slope_at_zero.abs());
}

#[test]
fn test_inflation_guard_and_resolved_growth() {
    let grid = standard_grid();
    let spec = IllposedDatumSpec {
        epsilon: 0.1,
        r: 2.0,
        p: 2.0,
        n_cut: 8,
        k_max: 8,
    };
    let zero = LineFunction::zeros(grid);
    let r = illposed::run_norm_inflation_for(&zero, spec, 0.99).unwrap();
    assert_eq!(assertion_of(&r.verdict), "illposed.negative_slope");
    assert_eq!(r.verdict.exit_code(), 3);

    let fine = Grid::new(5.5, 65536).unwrap();
    let u0 = Datum::Blowup { amplitude: 1.0 }.sample(fine).unwrap();
    let r = illposed::run_norm_inflation_for(&u0, spec, 0.99).unwrap();
    let t_star = r.estimates["t_star"];
    assert!((t_star - 2.0).abs() < 1e-6);
    let table = &r.series["inflation"];
    let mut tracked = 0;
    for (t, sup) in table.columns["t"].iter().zip(&table.columns["ux_sup"]) {
        if *t <= 0.94 * t_star {
            let envelope = 1.0 / (1.0 - 0.5 * t);
            assert!(
                (sup - envelope).abs() <= 0.02 * envelope,
                "t = {t}: {sup} vs {envelope}"
            );
            tracked += 1;
        }
    }
    assert!(tracked >= 4);
    assert!(r.estimates["growth"] > 1.0);
}

#[test]
fn test_unique_continuation_examples() {
    let grid = Grid::new(12.0, 1024).unwrap();
    let window = UcWindow {
        a: -1.0,
        b: 1.0,
        t1: 0.5,
        t2: 1.0,
    };
    let r = scenarios::run_unique_continuation(
        &Datum::Zero,
        grid,
        1.0,
        window,
        0.5,
        Forcing::Closure(0.5),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.check("uc.global_vanishing").unwrap().value, 0.0);

    let r = scenarios::run_unique_continuation(
        &Datum::default(),
        grid,
        1.0,
        window,
        0.5,
        Forcing::Closure(0.5),
    )
    .unwrap();
    assert_eq!(assertion_of(&r.verdict), "uc.premise");
    match &r.verdict {
        Verdict::Inapplicable { reason, .. } => assert!(reason.contains("no vanishing window")),
        v => panic!("unexpected verdict {v:?}"),
    }
}

#[test]
fn test_unique_continuation_uniform_drift() {
    let grid = Grid::new(12.0, 1024).unwrap();
    let c = 0.25;
    let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let traj = eulerian::integrate(
        &LineFunction::zeros(grid),
        &EulerianConfig::new(1.0).with_output_times(times),
        Forcing::Constant(c),
    )
    .unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        assert!(s.values().iter().all(|v| (v - c * t).abs() < 1e-12));
    }
    let later = UcWindow {
        a: -1.0,
        b: 1.0,
        t1: 0.5,
        t2: 1.0,
    };
    let r = scenarios::unique_continuation_probe(&traj, later, 0.5).unwrap();
    assert_eq!(assertion_of(&r.verdict), "uc.premise");
    let initial = UcWindow {
        t1: 0.0,
        t2: 0.0,
        ..later
    };
    let r = scenarios::unique_continuation_probe(&traj, initial, 0.5).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(scenarios::unique_continuation_probe(&traj, later, 0.0).is_err());
    assert!(
        scenarios::unique_continuation_probe(&traj, UcWindow { a: -20.0, ..later }, 0.5).is_err()
    );
}
