mod common;

use common::{integrate_characteristics, max_abs_diff, rk4_scalar, rk4_scalar_t, Characteristics};
use hunter_saxton::eulerian::{self, EulerianConfig, HaltReason};
use hunter_saxton::experiments::scenarios::covering_grid;
use hunter_saxton::experiments::Datum;
use hunter_saxton::grid::{DecayClass, Grid, LineFunction};
use hunter_saxton::lagrangian::{self, Forcing};
use hunter_saxton::picard::{self, SlicedField};

fn exact_state(datum: &Datum, grid: Grid, forcing: Forcing) -> lagrangian::CharacteristicState {
    let u0 = datum.sample(grid).unwrap();
    let slope = datum.sample_slope(grid).unwrap();
    lagrangian::init_state_with_slope(&u0, &slope, forcing).unwrap()
}

#[test]
fn test_closed_form_matches_characteristic_oracle() {
    let grid = Grid::new(12.0, 1024).unwrap();
    let datum = Datum::default();
    let state = exact_state(&datum, grid, Forcing::Zero);
    let times = [0.5, 1.0];
    let oracle = integrate_characteristics(
        Characteristics::from_datum(&datum, &grid),
        &grid,
        0.0,
        1e-3,
        &times,
    );
    for (t, o) in times.iter().zip(&oracle) {
        let snap = lagrangian::snapshot(&state, *t).unwrap();
        assert!(max_abs_diff(snap.q.values(), &o.q) < 1e-6, "q at t = {t}");
        assert!(
            max_abs_diff(snap.u_along.values(), &o.u) < 1e-6,
            "u at t = {t}"
        );
        assert!(
            max_abs_diff(snap.ux_along.values(), &o.w) < 1e-8,
            "u_x at t = {t}"
        );
        assert!(
            max_abs_diff(snap.qx.values(), &o.jac) < 1e-8,
            "q_x at t = {t}"
        );
    }
}

#[test]
fn test_closed_form_with_constant_forcing_matches_oracle() {
    let grid = Grid::new(12.0, 1024).unwrap();
    let datum = Datum::Blowup { amplitude: 0.5 };
    let state = exact_state(&datum, grid, Forcing::Constant(0.3));
    let oracle = integrate_characteristics(
        Characteristics::from_datum(&datum, &grid),
        &grid,
        0.3,
        1e-3,
        &[1.5],
    );
    let snap = lagrangian::snapshot(&state, 1.5).unwrap();
    assert!(max_abs_diff(snap.q.values(), &oracle[0].q) < 1e-6);
    assert!(max_abs_diff(snap.u_along.values(), &oracle[0].u) < 1e-6);
}

#[test]
fn test_riccati_matches_ode_oracle() {
    for (a, t) in [(1.0, 2.0), (-1.0, 1.0), (-0.4, 3.0), (2.5, 0.7)] {
        let ode = rk4_scalar(|w| -0.5 * w * w, a, t, 1e-4);
        assert!(
            (lagrangian::riccati_slope(a, t) - ode).abs() < 1e-10,
            "a = {a}, t = {t}"
        );
    }
    assert!((lagrangian::riccati_slope(1.0, 2.0) - 0.5).abs() < 1e-14);
}

#[test]
fn test_eulerian_matches_lagrangian_at_unit_time() {
    let grid = Grid::new(12.0, 4096).unwrap();
    let datum = Datum::default();
    let state = exact_state(&datum, grid, Forcing::Zero);
    let traj = eulerian::integrate(
        &datum.sample(grid).unwrap(),
        &EulerianConfig::new(1.0),
        Forcing::Zero,
    )
    .unwrap();
    assert_eq!(traj.halt, HaltReason::Completed);
    let reference =
        lagrangian::to_eulerian(&lagrangian::snapshot(&state, 1.0).unwrap(), &grid).unwrap();
    let last = traj.states.last().unwrap();
    assert!(max_abs_diff(last.values(), reference.u.values()) < 1e-4);
}

#[test]
fn test_global_criterion_integral_bounded() {
    let base = Grid::new(12.0, 2048).unwrap();
    let datum = Datum::default();
    let state = exact_state(&datum, base, Forcing::Zero);
    let wide = covering_grid(&state, 10.0, base).unwrap();
    let traj = eulerian::integrate(
        &datum.sample(wide).unwrap(),
        &EulerianConfig::new(10.0),
        Forcing::Zero,
    )
    .unwrap();
    assert_eq!(traj.halt, HaltReason::Completed);
    let integral = eulerian::criterion_integral(&traj);
    assert!(
        integral > 0.0 && integral <= 10.0 * (1.0 + 1e-3),
        "integral {integral}"
    );
}

#[test]
fn test_transported_bump_follows_characteristics() {
    let grid = Grid::new(12.0, 4096).unwrap();
    let t_max = 0.5;
    let (center, width) = (0.0, 0.4);
    let bump = |x: f64| (-((x - center) / width).powi(2)).exp();
    let field = Datum::default();
    let advect = SlicedField::from_fn(grid, t_max, |_, x| field.value(x));
    let source = SlicedField::zeros(grid, t_max);
    let u0 = LineFunction::from_fn(grid, DecayClass::GaussianDecay, bump).unwrap();
    let out = picard::transport_step(&advect, &source, &u0, t_max).unwrap();
    assert_eq!(out.escaped, 0);
    let last = out.field.final_state().unwrap();

    let foot = |x: f64| rk4_scalar_t(|_, y| field.value(y), x, t_max, 0.0, 1e-4);
    let worst = (0..grid.len())
        .filter(|&i| grid.x(i).abs() < 6.0)
        .map(|i| (last.values()[i] - bump(foot(grid.x(i)))).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "worst {worst}");

    let peak = (0..grid.len())
        .max_by(|&a, &b| last.values()[a].total_cmp(&last.values()[b]))
        .unwrap();
    let arrival = rk4_scalar_t(|_, y| field.value(y), center, 0.0, t_max, 1e-4);
    assert!((grid.x(peak) - arrival).abs() <= grid.spacing());
    assert!(arrival - center > 0.1);
}

#[test]
fn test_picard_contracts_to_lagrangian_solution() {
    let grid = Grid::new(12.0, 4096).unwrap();
    let datum = Datum::default();
    let u0 = datum.sample(grid).unwrap();
    let ledger = picard::run_iteration(&u0, 10, 0.1).unwrap();
    assert_eq!(ledger.halvings, 0);
    assert_eq!(ledger.iterates.len(), 11);
    assert_eq!(ledger.rows().len(), 10);
    for (n, r) in ledger.ratios.iter().enumerate().skip(3) {
        if let Some(r) = r {
            assert!(*r <= 0.6, "ratio {r} at n = {n}");
        }
    }
    let state = exact_state(&datum, grid, Forcing::Zero);
    let reference =
        lagrangian::to_eulerian(&lagrangian::snapshot(&state, 0.1).unwrap(), &grid).unwrap();
    let last = ledger.iterates.last().unwrap();
    assert!(max_abs_diff(last.values(), reference.u.values()) < 1e-4);
    assert!(ledger.diffs.iter().all(|d| d.is_finite()));
}
