//! Scenario drivers: each composes the solvers and records named checks.

use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::eulerian::{self, EulerianConfig, EulerianTrajectory, HaltReason};
use crate::grid::{self, Grid, LineFunction};
use crate::lagrangian::{self, CharacteristicState, Forcing};
use crate::littlewood_paley::{self, BesovParams};
use crate::picard;

use super::datum::{self, Datum};
use super::report::{ExperimentReport, Scenario, SeriesTable};

/// Relative tolerance for Lagrangian `Ḣ¹` conservation.
pub const LAGRANGIAN_CONSERVATION_TOL: f64 = 1e-6;
/// Relative tolerance for Eulerian `Ḣ¹` drift up to `0.9·t_end`.
pub const EULERIAN_CONSERVATION_TOL: f64 = 1e-3;
/// Slack on the slope bound of the global-existence monitor.
pub const GLOBAL_SLOPE_SLACK: f64 = 1e-3;
/// Number of sampled times for the inflection-pattern check.
pub const INFLECTION_SAMPLES: usize = 20;
/// Eulerian halt window as fractions of `T*`.
pub const HALT_WINDOW: (f64, f64) = (0.85, 1.0);
/// Riccati trace tolerance.
pub const RICCATI_TOL: f64 = 1e-8;
/// Lower bound for the criterion integral through `0.95·T*` (`2 ln 20` less quadrature slack).
pub const CRITERION_THROUGH_BOUND: f64 = 5.9;
/// Cross-solver `L^∞` tolerance.
pub const CROSSVAL_TOL: f64 = 1e-4;
/// Required error reduction when `n` doubles.
pub const CROSSVAL_REDUCTION: f64 = 3.0;
/// Largest allowed ratio of consecutive Picard diffs from `n = 3`.
pub const PICARD_RATIO: f64 = 0.6;
/// Picard limit tolerance against the Lagrangian solution.
pub const PICARD_LIMIT_TOL: f64 = 1e-4;
/// Allowed growth of the iterate norms relative to `e(u0)`.
pub const PICARD_UNIFORM_FACTOR: f64 = 4.0;
/// Relative stabilization of the partial diff sums at the last iterate.
pub const PICARD_CAUCHY_TOL: f64 = 1e-6;
/// `Ḃ⁰_{2,2}` versus `L²` tolerance for random functions.
pub const PLANCHEREL_TOL: f64 = 0.02;
/// Multiplicative slack of the interpolation inequality.
pub const INTERPOLATION_SLACK: f64 = 1.05;
/// Partition-of-unity tolerance of the bank.
pub const PARTITION_TOL: f64 = 1e-10;
/// Premise of the unique-continuation probe: `|u| ≤ 1e-8·scale` on the window.
pub const UC_VANISHING: f64 = 1e-8;
/// Conclusion of the unique-continuation probe: `‖u_x‖_{L²} ≤ 1e-6`.
pub const UC_CONCLUSION: f64 = 1e-6;

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| a + (b - a) * k as f64 / (count - 1) as f64)
        .collect()
}

fn grid_json(grid: &Grid) -> serde_json::Value {
    json!({"L": grid.half_width(), "n": grid.len()})
}

fn exact_state(
    datum: &Datum,
    grid: Grid,
    forcing: Forcing,
) -> Result<(LineFunction, CharacteristicState)> {
    let u0 = datum.sample(grid)?;
    let slope = datum.sample_slope(grid)?;
    let state = lagrangian::init_state_with_slope(&u0, &slope, forcing)?;
    Ok((u0, state))
}

/// A grid with the spacing of `base` whose half-width covers `q(t, x)` for every label
/// where `u_{0x}` is not negligible, for all `t ∈ [0, t_end]`, plus a margin of 2.
pub fn covering_grid(state: &CharacteristicState, t_end: f64, base: Grid) -> Result<Grid> {
    let slope = state.u0x();
    let cutoff = 1e-8 * slope.sup();
    let mut reach = base.half_width();
    for t in linspace(0.0, t_end, 21) {
        let snap = lagrangian::snapshot(state, t)?;
        for (i, &q) in snap.q.values().iter().enumerate() {
            if slope.values()[i].abs() > cutoff {
                reach = reach.max(q.abs() + 2.0);
            }
        }
    }
    if reach <= base.half_width() {
        return Ok(base);
    }
    Grid::with_spacing(base.spacing(), reach)
}

/// `Ḣ¹` conservation along both solvers.
pub fn run_conservation(datum: &Datum, grid: Grid, t_end: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Conservation,
        json!({"datum": datum, "grid": grid_json(&grid), "t_end": t_end}),
    );
    let (_, state) = exact_state(datum, grid, Forcing::Zero)?;
    let t_star = lagrangian::blowup_time(&state);
    report.estimate("t_star", t_star);
    if t_end >= t_star {
        return Ok(report
            .inapplicable(
                "conservation.horizon",
                format!("the solution blows up at {t_star} before t_end"),
            )
            .conclude(started));
    }
    let times = linspace(0.0, t_end, 51);
    let h1: Vec<f64> = times
        .iter()
        .map(|&t| lagrangian::snapshot(&state, t).map(|s| s.h1_squared()))
        .collect::<Result<_>>()?;
    let h0 = h1[0];
    let drift = h1
        .iter()
        .map(|h| {
            if h0 > 0.0 {
                (h - h0).abs() / h0
            } else {
                h.abs()
            }
        })
        .fold(0.0_f64, f64::max);
    report.estimate("h1_squared_initial", h0);
    report.estimate("lagrangian_drift", drift);
    report.table(
        "lagrangian",
        SeriesTable::default()
            .with("t", times.clone())
            .with("ux_l2_squared", h1),
    );
    report.check_le(
        "conservation.lagrangian",
        drift,
        LAGRANGIAN_CONSERVATION_TOL,
    );

    let wide = covering_grid(&state, t_end, grid)?;
    report.estimate("eulerian_half_width", wide.half_width());
    report.estimate("eulerian_points", wide.len() as f64);
    let u0 = datum.sample(wide)?;
    let config = EulerianConfig::new(t_end).with_output_times(times);
    let traj = eulerian::integrate(&u0, &config, Forcing::Zero)?;
    let horizon = 0.9 * t_end;
    let eul_drift = traj.h1_drift_until(horizon);
    report.estimate("eulerian_drift", eul_drift);
    report.estimate("eulerian_halt_time", traj.halt_time);
    report.table("eulerian", trajectory_table(&traj));
    report.check_ge("conservation.eulerian_horizon", traj.halt_time, horizon);
    report.check_le(
        "conservation.eulerian",
        eul_drift,
        EULERIAN_CONSERVATION_TOL,
    );
    Ok(report.conclude(started))
}

fn trajectory_table(traj: &EulerianTrajectory) -> SeriesTable {
    SeriesTable::default()
        .with("t", traj.times.clone())
        .with("ux_sup", traj.ux_sup_series.clone())
        .with("ux_l2", traj.h1_series.clone())
}

/// Slope-monotonicity hypothesis: `u_{0xx} ≥ 0` left of the steepest point and `≤ 0`
/// right of it, with positive slope there. Returns the steepest label on success.
pub fn global_hypotheses(datum: &Datum, grid: &Grid) -> std::result::Result<f64, String> {
    let i0 = (0..grid.len())
        .max_by(|&a, &b| datum.slope(grid.x(a)).total_cmp(&datum.slope(grid.x(b))))
        .expect("grid is never empty");
    let x0 = grid.x(i0);
    if !(datum.slope(x0) > 0.0) {
        return Err(format!("largest slope {} is not positive", datum.slope(x0)));
    }
    let scale = (0..grid.len()).fold(0.0_f64, |m, i| m.max(datum.curvature(grid.x(i)).abs()));
    let tol = 1e-12 * scale;
    for i in 0..grid.len() {
        let c = datum.curvature(grid.x(i));
        if (i < i0 && c < -tol) || (i > i0 && c > tol) {
            return Err(format!("u0xx has the wrong sign at x = {}", grid.x(i)));
        }
    }
    Ok(x0)
}

/// Global existence: slope bound, monotone decay of `‖u_x‖_∞` and preserved inflection pattern.
pub fn run_global(datum: &Datum, grid: Grid, t_end: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Global,
        json!({"datum": datum, "grid": grid_json(&grid), "t_end": t_end}),
    );
    let x0 = match global_hypotheses(datum, &grid) {
        Ok(x0) => x0,
        Err(reason) => {
            return Ok(report
                .inapplicable("global.hypotheses", reason)
                .conclude(started))
        }
    };
    let (_, state) = exact_state(datum, grid, Forcing::Zero)?;
    let bound = state.u0x().sup();
    report.estimate("x0", x0);
    report.estimate("u0x_sup", bound);

    let times = linspace(0.0, t_end, 201);
    let sups: Vec<f64> = times
        .iter()
        .map(|&t| lagrangian::snapshot(&state, t).map(|s| s.ux_along.sup()))
        .collect::<Result<_>>()?;
    let worst = sups.iter().fold(0.0_f64, |m, &v| m.max(v));
    let monotone = sups.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    report.table(
        "monitor",
        SeriesTable::default().with("t", times).with("ux_sup", sups),
    );
    report.check_le(
        "global.slope_bound",
        worst,
        bound * (1.0 + GLOBAL_SLOPE_SLACK),
    );
    report.check_true("global.monotone_slope", monotone);

    let wide = covering_grid(&state, t_end, grid)?;
    report.estimate("eulerian_half_width", wide.half_width());
    let i0 = grid.nearest_index(x0);
    let h = wide.spacing();
    let mut sample_t = Vec::with_capacity(INFLECTION_SAMPLES);
    let mut sample_sup = Vec::with_capacity(INFLECTION_SAMPLES);
    let mut sample_violation = Vec::with_capacity(INFLECTION_SAMPLES);
    for k in 1..=INFLECTION_SAMPLES {
        let t = t_end * k as f64 / INFLECTION_SAMPLES as f64;
        let snap = lagrangian::snapshot(&state, t)?;
        let fields = lagrangian::to_eulerian(&snap, &wide)?;
        let uxx = grid::derivative(&fields.ux)?;
        let scale = uxx.sup().max(f64::MIN_POSITIVE);
        let q = snap.q.values();
        let (lo, hi) = (
            q[i0.saturating_sub(1)] - 2.0 * h,
            q[(i0 + 1).min(q.len() - 1)] + 2.0 * h,
        );
        let violation = uxx
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let y = wide.x(i);
                if y < lo {
                    (-v).max(0.0)
                } else if y > hi {
                    v.max(0.0)
                } else {
                    0.0
                }
            })
            .fold(0.0_f64, f64::max)
            / scale;
        sample_t.push(t);
        sample_sup.push(fields.ux.sup());
        sample_violation.push(violation);
    }
    let eul_worst = sample_sup.iter().fold(0.0_f64, |m, &v| m.max(v));
    let inflection = sample_violation.iter().fold(0.0_f64, |m, &v| m.max(v));
    report.table(
        "inflection",
        SeriesTable::default()
            .with("t", sample_t)
            .with("ux_sup", sample_sup)
            .with("relative_sign_violation", sample_violation),
    );
    report.check_le(
        "global.eulerian_slope_bound",
        eul_worst,
        bound * (1.0 + GLOBAL_SLOPE_SLACK),
    );
    report.check_le("global.inflection_pattern", inflection, INFLECTION_TOL);
    Ok(report.conclude(started))
}

/// Largest wrong-signed `u_xx` relative to `‖u_xx‖_∞` accepted as resampling noise.
pub const INFLECTION_TOL: f64 = 1e-6;

/// Blow-up: formula, Riccati trace and the Eulerian halt.
pub fn run_blowup(datum: &Datum, grid: Grid) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Blowup,
        json!({"datum": datum, "grid": grid_json(&grid)}),
    );
    let (x_min, a) = datum.min_slope(&grid);
    let (u0, state) = exact_state(datum, grid, Forcing::Zero)?;
    if a >= -grid::DECAY_TOLERANCE * state.u0x().sup().max(f64::MIN_POSITIVE) {
        return Ok(report
            .inapplicable(
                "blowup.negative_slope",
                "datum has no negative slope, T* is infinite",
            )
            .conclude(started));
    }
    let t_star = -2.0 / a;
    report.estimate("t_star", t_star);
    report.estimate("t_star_grid", lagrangian::blowup_time(&state));
    report.estimate("min_slope_label", x_min);
    report.estimate("min_slope", a);

    let fractions = [0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999];
    let times: Vec<f64> = fractions.iter().map(|f| f * t_star).collect();
    let trace: Vec<f64> = times
        .iter()
        .map(|&t| lagrangian::riccati_slope(a, t))
        .collect();
    let closed: Vec<f64> = times.iter().map(|&t| 2.0 / (t - t_star)).collect();
    let trace_err = trace
        .iter()
        .zip(&closed)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max);
    report.table(
        "riccati",
        SeriesTable::default()
            .with("t", times)
            .with("trace", trace)
            .with("closed_form", closed),
    );
    report.check_le("blowup.riccati_trace", trace_err, RICCATI_TOL);

    let traj = eulerian::integrate(&u0, &EulerianConfig::new(t_star), Forcing::Zero)?;
    let t_halt = traj.halt_time;
    let through = eulerian::criterion_integral_until(&traj, 0.95 * t_star);
    let total = eulerian::criterion_integral(&traj);
    let envelope = 2.0 * (t_star / (t_star - t_halt)).ln();
    report.estimate("halt_time", t_halt);
    report.estimate("criterion_through_095", through);
    report.estimate("criterion_through_halt", total);
    report.estimate("riccati_envelope_at_halt", envelope);
    report.table(
        "eulerian",
        SeriesTable::default()
            .with("t", traj.monitor.t.clone())
            .with("ux_sup", traj.monitor.ux_sup.clone())
            .with("ux_l2", traj.monitor.h1.clone()),
    );
    report.check_true("blowup.halted", traj.halt != HaltReason::Completed);
    report.check_ge("blowup.halt_after", t_halt, HALT_WINDOW.0 * t_star);
    report.check_le("blowup.halt_before", t_halt, HALT_WINDOW.1 * t_star);
    report.check_ge(
        "blowup.criterion_integral",
        through,
        CRITERION_THROUGH_BOUND,
    );
    report.check_ge("blowup.criterion_vs_riccati", total, 0.9 * envelope);
    Ok(report.conclude(started))
}

/// `L^∞` distance between the Eulerian solution and the resampled Lagrangian one at `t`.
pub fn crossval_error(datum: &Datum, grid: Grid, t: f64) -> Result<f64> {
    let (u0, state) = exact_state(datum, grid, Forcing::Zero)?;
    let traj = eulerian::integrate(&u0, &EulerianConfig::new(t), Forcing::Zero)?;
    if traj.halted_early() {
        return Err(Error::SchemeFailure(format!(
            "Eulerian run halted at {}",
            traj.halt_time
        )));
    }
    let reference = lagrangian::to_eulerian(&lagrangian::snapshot(&state, t)?, &grid)?;
    let last = traj
        .states
        .last()
        .expect("trajectory stores the final state");
    Ok(grid::sup_abs(&last.sub(&reference.u)?.into_values()))
}

/// Cross-solver agreement at `n` and convergence when `n` doubles.
pub fn run_crossval(datum: &Datum, grid: Grid, t: f64) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Crossval,
        json!({"datum": datum, "grid": grid_json(&grid), "t": t}),
    );
    let fine = Grid::new(grid.half_width(), 2 * grid.len())?;
    let coarse_err = crossval_error(datum, grid, t)?;
    let fine_err = crossval_error(datum, fine, t)?;
    let reduction = coarse_err / fine_err.max(f64::MIN_POSITIVE);
    report.estimate("error_n", coarse_err);
    report.estimate("error_2n", fine_err);
    report.estimate("reduction", reduction);
    report.table(
        "errors",
        SeriesTable::default()
            .with("n", vec![grid.len() as f64, fine.len() as f64])
            .with("linf_error", vec![coarse_err, fine_err]),
    );
    report.check_le("crossval.agreement", coarse_err, CROSSVAL_TOL);
    report.check_ge("crossval.convergence", reduction, CROSSVAL_REDUCTION);
    Ok(report.conclude(started))
}

/// The Picard scheme: contraction, limit, uniform bound and Cauchy property.
pub fn run_picard(
    datum: &Datum,
    grid: Grid,
    n_iter: usize,
    t_iter: f64,
) -> Result<(ExperimentReport, picard::IterationLedger)> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Picard,
        json!({"datum": datum, "grid": grid_json(&grid), "n_iter": n_iter, "t_iter": t_iter}),
    );
    let (u0, state) = exact_state(datum, grid, Forcing::Zero)?;
    let bank = littlewood_paley::build_widest_filter_bank(grid)?;
    let params = picard::default_e_params();
    let e0 = littlewood_paley::e_space_norm(&bank, &u0, params)?;
    let ledger = picard::run_iteration_with(&u0, n_iter, t_iter, &bank, params)?;
    let t = ledger.t_iter;
    report.estimate("t_iter", t);
    report.estimate("halvings", ledger.halvings as f64);
    report.estimate("e_norm_u0", e0);

    let worst_ratio = ledger
        .ratios
        .iter()
        .enumerate()
        .filter(|(n, _)| *n >= 3)
        .filter_map(|(_, r)| *r)
        .fold(0.0_f64, f64::max);
    let reference = lagrangian::to_eulerian(&lagrangian::snapshot(&state, t)?, &grid)?;
    let last = ledger.iterates.last().expect("ledger holds u0");
    let limit_err = picard::probe_norm(&last.sub(&reference.u)?.into_values(), &grid);
    let max_e = ledger.e_norms.iter().fold(0.0_f64, |m, &v| m.max(v));
    let sums = ledger.partial_sums();
    let total = *sums.last().unwrap_or(&0.0);
    let settle = if sums.len() >= 2 && total > 0.0 {
        (total - sums[sums.len() - 2]).abs() / total
    } else {
        0.0
    };
    let escaped: usize = ledger.escaped.iter().sum();
    report.estimate("max_ratio_from_3", worst_ratio);
    report.estimate("limit_probe_error", limit_err);
    report.estimate("max_e_norm", max_e);
    report.estimate("partial_sum_settle", settle);
    report.estimate("escaped", escaped as f64);
    if let Some(b) = ledger.source_bound() {
        report.estimate("source_bound", b);
    }
    let rows = ledger.rows();
    report.table(
        "ledger",
        SeriesTable::default()
            .with("n", rows.iter().map(|r| r.n as f64).collect())
            .with("e_norm", rows.iter().map(|r| r.e_norm).collect())
            .with("diff", rows.iter().map(|r| r.diff).collect())
            .with(
                "ratio",
                rows.iter().map(|r| r.ratio.unwrap_or(f64::NAN)).collect(),
            )
            .with("sampled_diff", ledger.sampled_diffs[1..].to_vec())
            .with("partial_sum", sums[1..].to_vec()),
    );
    report.check_le("picard.contraction", worst_ratio, PICARD_RATIO);
    report.check_le("picard.lagrangian_limit", limit_err, PICARD_LIMIT_TOL);
    report.check_le("picard.uniform_bound", max_e, PICARD_UNIFORM_FACTOR * e0);
    report.check_le("picard.cauchy", settle, PICARD_CAUCHY_TOL);
    report.check_true(
        "picard.source_bound_finite",
        ledger.source_ratios.iter().flatten().all(|r| r.is_finite()),
    );
    report.check_true("picard.no_escape", escaped == 0);
    Ok((report.conclude(started), ledger))
}

/// Bank invariants and norm-equivalence checks on seeded random band-limited functions.
pub fn run_lp_soundness(grid: Grid, seed: u64, count: usize) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Besov,
        json!({"grid": grid_json(&grid), "seed": seed, "count": count}),
    );
    let bank = littlewood_paley::build_widest_filter_bank(grid)?;
    let inv = bank.invariants();
    report.estimate("j_min", bank.j_min() as f64);
    report.estimate("j_max", bank.j_max() as f64);
    report.estimate("partition_error", inv.partition_error);
    report.estimate("square_sum_min", inv.square_sum_min);
    report.estimate("square_sum_max", inv.square_sum_max);
    report.check_le(
        "besov.partition_of_unity",
        inv.partition_error,
        PARTITION_TOL,
    );
    report.check_ge("besov.square_sum_lower", inv.square_sum_min, 0.5);
    report.check_le(
        "besov.square_sum_upper",
        inv.square_sum_max,
        1.0 + PARTITION_TOL,
    );

    let samples = datum::random_band_limited_set(grid, seed, count)?;
    let mut plancherel = Vec::with_capacity(count);
    let mut interpolation = Vec::with_capacity(count);
    for f in &samples {
        let blocks = littlewood_paley::block_norms(
            &bank,
            f,
            2.0,
            littlewood_paley::Homogeneity::Homogeneous,
        )?;
        let energy = grid::lp_norm(f, 2.0)?;
        let b0 = blocks.aggregate(0.0, 2.0)?;
        let b2 = blocks.aggregate(2.0, 2.0)?;
        plancherel.push((b0 - energy).abs() / energy);
        let worst = [0.25, 0.5, 0.75]
            .iter()
            .map(|&theta: &f64| {
                let mid = blocks.aggregate(2.0 * (1.0 - theta), 2.0)?;
                Ok(mid / (b0.powf(theta) * b2.powf(1.0 - theta)))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0_f64, f64::max);
        interpolation.push(worst);
    }
    let worst_plancherel = plancherel.iter().fold(0.0_f64, |m, &v| m.max(v));
    let worst_interp = interpolation.iter().fold(0.0_f64, |m, &v| m.max(v));
    report.estimate("worst_plancherel_deviation", worst_plancherel);
    report.estimate("worst_interpolation_ratio", worst_interp);
    report.table(
        "random",
        SeriesTable::default()
            .with("index", (0..count).map(|i| i as f64).collect())
            .with("plancherel_deviation", plancherel)
            .with("interpolation_ratio", interpolation),
    );
    report.check_le("besov.plancherel", worst_plancherel, PLANCHEREL_TOL);
    report.check_le("besov.interpolation", worst_interp, INTERPOLATION_SLACK);
    Ok(report.conclude(started))
}

/// Besov norm of a datum, reported alongside the soundness checks.
pub fn datum_norm(datum: &Datum, grid: Grid, params: BesovParams) -> Result<f64> {
    let bank = littlewood_paley::build_widest_filter_bank(grid)?;
    littlewood_paley::besov_norm(&bank, &datum.sample(grid)?, params)
}

/// Both solvers from one datum to `t_end`.
pub struct SolveOutput {
    pub report: ExperimentReport,
    pub snapshot: lagrangian::LagrangianSnapshot,
    pub trajectory: EulerianTrajectory,
}

/// Runs both solvers to `t_end`; passes when the snapshot is valid and the Eulerian run completes.
pub fn run_solve(datum: &Datum, grid: Grid, t_end: f64, forcing: Forcing) -> Result<SolveOutput> {
    let started = Instant::now();
    let mut report = ExperimentReport::new(
        Scenario::Solve,
        json!({"datum": datum, "grid": grid_json(&grid), "t_end": t_end, "forcing": forcing}),
    );
    let (u0, state) = exact_state(datum, grid, forcing)?;
    let snapshot = lagrangian::snapshot(&state, t_end)?;
    let times = linspace(0.0, t_end, 11);
    let trajectory = eulerian::integrate(
        &u0,
        &EulerianConfig::new(t_end).with_output_times(times),
        forcing,
    )?;
    report.estimate("t_star", lagrangian::blowup_time(&state));
    report.estimate("snapshot_margin", snapshot.margin);
    report.estimate(
        "criterion_integral",
        eulerian::criterion_integral(&trajectory),
    );
    report.table("eulerian", trajectory_table(&trajectory));
    report.check_true("solve.snapshot_valid", snapshot.valid);
    report.check_true(
        "solve.eulerian_completed",
        trajectory.halt == HaltReason::Completed,
    );
    Ok(SolveOutput {
        report: report.conclude(started),
        snapshot,
        trajectory,
    })
}

/// Space-time window `(a, b) × [t1, t2]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UcWindow {
    pub a: f64,
    pub b: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Unique-continuation probe with closure forcing `C > 0`.
///
/// When `u` vanishes on the window, the nondecreasing quantity `∫_{-∞}^x ½u_x² +
/// C∫_ℝ ½u_x²` must vanish there, so `u_x ≡ 0` on the whole line at those times.
pub fn unique_continuation_probe(
    traj: &EulerianTrajectory,
    window: UcWindow,
    c_forcing: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if !(c_forcing > 0.0) {
        return Err(Error::InvalidParams(format!(
            "the probe needs C > 0, got {c_forcing}"
        )));
    }
    let grid = traj.grid;
    let horizon = *traj.times.last().unwrap_or(&0.0);
    let inside = |x: f64| x >= -grid.half_width() && x <= grid.half_width();
    if !(window.a < window.b && inside(window.a) && inside(window.b)) {
        return Err(Error::InvalidParams(format!(
            "window ({}, {}) is outside the domain",
            window.a, window.b
        )));
    }
    if !(0.0 <= window.t1 && window.t1 <= window.t2 && window.t2 <= horizon) {
        return Err(Error::InvalidParams(format!(
            "time window [{}, {}] is outside [0, {horizon}]",
            window.t1, window.t2
        )));
    }
    let mut report = ExperimentReport::new(
        Scenario::UniqueContinuation,
        json!({"window": window, "c_forcing": c_forcing, "grid": grid_json(&grid)}),
    );
    let picked: Vec<usize> = (0..traj.times.len())
        .filter(|&k| traj.times[k] >= window.t1 && traj.times[k] <= window.t2)
        .collect();
    if picked.is_empty() {
        return Err(Error::InvalidParams(
            "no stored state lies in the time window".into(),
        ));
    }
    let scale = traj.states.iter().fold(1.0_f64, |m, s| m.max(s.sup()));
    let window_max = picked
        .iter()
        .map(|&k| {
            traj.states[k]
                .values()
                .iter()
                .enumerate()
                .filter(|(i, _)| grid.x(*i) > window.a && grid.x(*i) < window.b)
                .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
        })
        .fold(0.0_f64, f64::max);
    report.estimate("window_sup", window_max);
    report.estimate("scale", scale);
    if window_max > UC_VANISHING * scale {
        return Ok(report
            .inapplicable(
                "uc.premise",
                format!("no vanishing window: max |u| = {window_max:e} on the window"),
            )
            .conclude(started));
    }
    let mut times = Vec::with_capacity(picked.len());
    let mut ux_l2 = Vec::with_capacity(picked.len());
    let mut quantity = Vec::with_capacity(picked.len());
    for &k in &picked {
        let ux = grid::derivative(&traj.states[k])?;
        let sq: Vec<f64> = ux.values().iter().map(|v| 0.5 * v * v).collect();
        let mut running = vec![0.0; sq.len()];
        grid::cumulative_trapezoid_into(&sq, grid.spacing(), &mut running);
        let total = *running.last().unwrap_or(&0.0);
        let on_window = (0..grid.len())
            .filter(|&i| grid.x(i) > window.a && grid.x(i) < window.b)
            .map(|i| running[i] + 2.0 * c_forcing * total)
            .fold(0.0_f64, f64::max);
        times.push(traj.times[k]);
        ux_l2.push((2.0 * total).sqrt());
        quantity.push(on_window);
    }
    let worst = ux_l2.iter().fold(0.0_f64, |m, &v| m.max(v));
    report.table(
        "probe",
        SeriesTable::default()
            .with("t", times)
            .with("ux_l2", ux_l2)
            .with("window_quantity", quantity),
    );
    report.check_le("uc.global_vanishing", worst, UC_CONCLUSION);
    Ok(report.conclude(started))
}

/// Integrates a datum with closure forcing and probes the window.
pub fn run_unique_continuation(
    datum: &Datum,
    grid: Grid,
    t_end: f64,
    window: UcWindow,
    c_forcing: f64,
    forcing: Forcing,
) -> Result<ExperimentReport> {
    let u0 = datum.sample(grid)?;
    let times = linspace(0.0, t_end, 11);
    let traj = eulerian::integrate(
        &u0,
        &EulerianConfig::new(t_end).with_output_times(times),
        forcing,
    )?;
    let mut report = unique_continuation_probe(&traj, window, c_forcing)?;
    if let serde_json::Value::Object(map) = &mut report.inputs {
        map.insert("datum".into(), json!(datum));
        map.insert("forcing".into(), json!(forcing));
    }
    Ok(report)
}
