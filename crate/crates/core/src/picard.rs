//! Picard iteration through frozen-coefficient transport problems.
//!
//! Starting from `u⁰ ≡ 0`, each iterate solves the linear problem
//! `u^{n+1}_t + u^n u^{n+1}_x = G^n`, `G^n = ∫_{-∞}^x ½(u^n_x)²`, with initial value
//! `u_0`, by tracing characteristics of the frozen field `u^n` back to `t = 0` and
//! accumulating the frozen source along them.
//!
//! Frozen fields are stored at [`SLICES`] uniform times on `[0, T]`; values between
//! slices use cubic interpolation in time and in space.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, Grid, LineFunction};
use crate::littlewood_paley::{self, DyadicFilterBank, ESpaceParams};

/// Number of stored time slices of a frozen field.
pub const SLICES: usize = 33;

/// Consecutive diff increases that trigger halving the horizon.
const GROWTH_RUN: usize = 3;
/// Smallest horizon tried before the scheme is declared non-contractive.
const MIN_HORIZON: f64 = 1e-3;
/// Diffs below this fraction of the probe norm of the iterate are at roundoff.
const ROUNDOFF_FLOOR: f64 = 1e-11;

/// A field on `[0, T] × grid` stored at [`SLICES`] uniform times.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedField {
    grid: Grid,
    t_max: f64,
    slices: Vec<Vec<f64>>,
}

impl SlicedField {
    pub fn zeros(grid: Grid, t_max: f64) -> Self {
        Self {
            grid,
            t_max,
            slices: vec![vec![0.0; grid.len()]; SLICES],
        }
    }

    /// Samples `f(t, x)` at the slice times.
    pub fn from_fn(grid: Grid, t_max: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let slices = (0..SLICES)
            .map(|k| {
                let t = k as f64 * t_max / (SLICES - 1) as f64;
                (0..grid.len()).map(|i| f(t, grid.x(i))).collect()
            })
            .collect();
        Self {
            grid,
            t_max,
            slices,
        }
    }

    pub fn from_slices(grid: Grid, t_max: f64, slices: Vec<Vec<f64>>) -> Result<Self> {
        if slices.len() != SLICES || slices.iter().any(|s| s.len() != grid.len()) {
            return Err(Error::InvalidParams(format!(
                "a sliced field needs {SLICES} slices of {} values",
                grid.len()
            )));
        }
        for s in &slices {
            grid::check_finite(s, "sliced field")?;
        }
        Ok(Self {
            grid,
            t_max,
            slices,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn slice_time(&self, k: usize) -> f64 {
        k as f64 * self.slice_step()
    }

    fn slice_step(&self) -> f64 {
        self.t_max / (SLICES - 1) as f64
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        &self.slices[k]
    }

    /// The slice at `t_max` as a line function.
    pub fn final_state(&self) -> Result<LineFunction> {
        LineFunction::classified(self.grid, self.slices[SLICES - 1].clone())
    }

    /// Values at time `t` (cubic in time between slices).
    pub fn at_time(&self, t: f64) -> Vec<f64> {
        let s = (t / self.slice_step()).clamp(0.0, (SLICES - 1) as f64);
        let i0 = (s.floor() as isize - 1).clamp(0, SLICES as isize - 4) as usize;
        let w = cubic_weights(s - i0 as f64);
        let n = self.grid.len();
        (0..n)
            .map(|i| (0..4).map(|m| w[m] * self.slices[i0 + m][i]).sum())
            .collect()
    }

    /// Value at `(t, x)`: cubic in time and space.
    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        let s = (t / self.slice_step()).clamp(0.0, (SLICES - 1) as f64);
        let i0 = (s.floor() as isize - 1).clamp(0, SLICES as isize - 4) as usize;
        let w = cubic_weights(s - i0 as f64);
        (0..4)
            .map(|m| w[m] * grid::lagrange4(&self.slices[i0 + m], &self.grid, x))
            .sum()
    }
}

/// Lagrange weights for nodes 0, 1, 2, 3 at position `t`.
fn cubic_weights(t: f64) -> [f64; 4] {
    let (t0, t1, t2, t3) = (t, t - 1.0, t - 2.0, t - 3.0);
    [
        -t1 * t2 * t3 / 6.0,
        t0 * t2 * t3 / 2.0,
        -t0 * t1 * t3 / 2.0,
        t0 * t1 * t2 / 6.0,
    ]
}

/// Result of one transport solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportOutcome {
    pub field: SlicedField,
    /// Number of traced characteristics that left `[-L, L]` (boundary contamination).
    pub escaped: usize,
}

/// Solves `f_t + v f_x = s`, `f(0) = u0`, on the slice times of `advect`.
///
/// Each grid point at each slice time is traced back to `t = 0` by RK4 with one step
/// per slice interval; the source is integrated along the same stages.
pub fn transport_step(
    advect: &SlicedField,
    source: &SlicedField,
    u0: &LineFunction,
    t_max: f64,
) -> Result<TransportOutcome> {
    let grid = *u0.grid();
    if *advect.grid() != grid || *source.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if (advect.t_max - t_max).abs() > 1e-14 * t_max || (source.t_max - t_max).abs() > 1e-14 * t_max
    {
        return Err(Error::InvalidParams(
            "frozen fields must cover [0, T]".into(),
        ));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "horizon must be positive, got {t_max}"
        )));
    }
    let dt = advect.slice_step();
    let mid_advect: Vec<Vec<f64>> = (1..SLICES)
        .map(|m| advect.at_time(advect.slice_time(m) - 0.5 * dt))
        .collect();
    let mid_source: Vec<Vec<f64>> = (1..SLICES)
        .map(|m| source.at_time(source.slice_time(m) - 0.5 * dt))
        .collect();
    let edge = grid.half_width() + 0.5 * grid.spacing();

    let traced: Vec<(Vec<f64>, usize)> = (0..SLICES)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::with_capacity(grid.len());
            let mut escaped = 0;
            for i in 0..grid.len() {
                let mut x = grid.x(i);
                let mut acc = 0.0;
                let mut left = false;
                for m in (1..=k).rev() {
                    let (v_hi, v_mid, v_lo) =
                        (advect.slice(m), &mid_advect[m - 1], advect.slice(m - 1));
                    let (s_hi, s_mid, s_lo) =
                        (source.slice(m), &mid_source[m - 1], source.slice(m - 1));
                    let x1 = x;
                    let k1 = grid::lagrange4(v_hi, &grid, x1);
                    let x2 = x - 0.5 * dt * k1;
                    let k2 = grid::lagrange4(v_mid, &grid, x2);
                    let x3 = x - 0.5 * dt * k2;
                    let k3 = grid::lagrange4(v_mid, &grid, x3);
                    let x4 = x - dt * k3;
                    let k4 = grid::lagrange4(v_lo, &grid, x4);
                    acc += dt / 6.0
                        * (grid::lagrange4(s_hi, &grid, x1)
                            + 2.0 * grid::lagrange4(s_mid, &grid, x2)
                            + 2.0 * grid::lagrange4(s_mid, &grid, x3)
                            + grid::lagrange4(s_lo, &grid, x4));
                    x -= dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                    left |= x.abs() > edge;
                }
                if left {
                    escaped += 1;
                }
                out.push(u0.evaluate_cubic(x) + acc);
            }
            (out, escaped)
        })
        .collect();
    let escaped = traced.iter().map(|(_, e)| e).sum();
    let slices = traced.into_iter().map(|(s, _)| s).collect();
    Ok(TransportOutcome {
        field: SlicedField::from_slices(grid, t_max, slices)?,
        escaped,
    })
}

/// `G = ∫_{-∞}^x ½u_x²` slice by slice.
pub fn source_of(u: &SlicedField) -> Result<SlicedField> {
    let grid = u.grid;
    let h = grid.spacing();
    let slices = u
        .slices
        .iter()
        .map(|s| {
            let mut d = vec![0.0; s.len()];
            grid::derivative_into(s, h, &mut d);
            let half_sq: Vec<f64> = d.iter().map(|v| 0.5 * v * v).collect();
            if !grid::left_decays(&half_sq) {
                return Err(Error::Truncation(
                    "iterate slope does not decay at the left boundary".into(),
                ));
            }
            let mut g = vec![0.0; s.len()];
            grid::cumulative_trapezoid_into(&half_sq, h, &mut g);
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    SlicedField::from_slices(grid, u.t_max, slices)
}

/// `‖w‖_∞ + ‖w_x‖_{L²}`, the norm in which iterates are compared.
pub fn probe_norm(values: &[f64], grid: &Grid) -> f64 {
    let mut d = vec![0.0; values.len()];
    grid::derivative_into(values, grid.spacing(), &mut d);
    let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
    grid::sup_abs(values) + grid::trapezoid(&sq, grid.spacing()).sqrt()
}

fn probe_diff(a: &[f64], b: &[f64], grid: &Grid) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    probe_norm(&d, grid)
}

/// One ledger row: iterate index, its mixed-space norm, the diff to its predecessor and
/// the ratio of consecutive diffs (absent at roundoff level).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub n: usize,
    pub e_norm: f64,
    pub diff: f64,
    pub ratio: Option<f64>,
}

/// Record of a Picard run. Vectors are indexed by the iterate number `n`; entry 0
/// belongs to `u⁰ ≡ 0`, which has no predecessor (diff 0, no ratio).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLedger {
    /// Horizon actually used after any automatic halving.
    pub t_iter: f64,
    pub halvings: usize,
    /// `u^n(T)`.
    pub iterates: Vec<LineFunction>,
    pub e_norms: Vec<f64>,
    /// Probe-norm distance `u^n(T) − u^{n−1}(T)`.
    pub diffs: Vec<f64>,
    /// Largest probe-norm distance over the times `0, T/4, T/2, 3T/4, T`.
    pub sampled_diffs: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
    /// `e(G^n) / e(u^n)²` for `n ≥ 1`.
    pub source_ratios: Vec<Option<f64>>,
    /// Characteristics that left the domain, per iterate.
    pub escaped: Vec<usize>,
    /// Full trajectories of the last two iterates.
    pub last_trajectories: Vec<SlicedField>,
}

impl IterationLedger {
    pub fn rows(&self) -> Vec<LedgerRow> {
        (1..self.iterates.len())
            .map(|n| LedgerRow {
                n,
                e_norm: self.e_norms[n],
                diff: self.diffs[n],
                ratio: self.ratios[n],
            })
            .collect()
    }

    /// Running sums of the diffs.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.diffs
            .iter()
            .scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            })
            .collect()
    }

    /// Largest finite source-bound ratio.
    pub fn source_bound(&self) -> Option<f64> {
        self.source_ratios
            .iter()
            .flatten()
            .copied()
            .reduce(f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows())?)
    }
}

/// The default mixed-space parameters `E²_{2,2}` used for iterate norms.
pub fn default_e_params() -> ESpaceParams {
    ESpaceParams::new(2.0, 2.0, 2.0).expect("E²_{2,2} parameters are valid")
}

/// Runs `n_iter` Picard steps on `[0, t_max]`, halving the horizon whenever the diffs
/// grow for three consecutive iterates.
pub fn run_iteration(u0: &LineFunction, n_iter: usize, t_max: f64) -> Result<IterationLedger> {
    let bank = littlewood_paley::build_widest_filter_bank(*u0.grid())?;
    run_iteration_with(u0, n_iter, t_max, &bank, default_e_params())
}

/// [`run_iteration`] with an explicit filter bank and norm parameters.
pub fn run_iteration_with(
    u0: &LineFunction,
    n_iter: usize,
    t_max: f64,
    bank: &DyadicFilterBank,
    params: ESpaceParams,
) -> Result<IterationLedger> {
    if n_iter == 0 {
        return Err(Error::InvalidParams(
            "at least one iteration is needed".into(),
        ));
    }
    let mut horizon = t_max;
    let mut halvings = 0;
    loop {
        if horizon < MIN_HORIZON {
            return Err(Error::SchemeFailure(format!(
                "diffs keep growing after shrinking the horizon below {MIN_HORIZON}"
            )));
        }
        match attempt(u0, n_iter, horizon, bank, params)? {
            Some(mut ledger) => {
                ledger.halvings = halvings;
                return Ok(ledger);
            }
            None => {
                horizon *= 0.5;
                halvings += 1;
            }
        }
    }
}

fn attempt(
    u0: &LineFunction,
    n_iter: usize,
    horizon: f64,
    bank: &DyadicFilterBank,
    params: ESpaceParams,
) -> Result<Option<IterationLedger>> {
    let grid = *u0.grid();
    let samples: Vec<f64> = (0..5).map(|m| m as f64 * horizon / 4.0).collect();
    let e_norm = |values: Vec<f64>| -> Result<f64> {
        let f = LineFunction::classified(grid, values)?;
        littlewood_paley::e_space_norm(bank, &f, params)
    };

    let mut current = SlicedField::zeros(grid, horizon);
    let mut source = SlicedField::zeros(grid, horizon);
    let mut ledger = IterationLedger {
        t_iter: horizon,
        halvings: 0,
        iterates: vec![LineFunction::zeros(grid)],
        e_norms: vec![0.0],
        diffs: vec![0.0],
        sampled_diffs: vec![0.0],
        ratios: vec![None],
        source_ratios: vec![None],
        escaped: vec![0],
        last_trajectories: Vec::new(),
    };
    let mut growth = 0;
    for n in 1..=n_iter {
        let outcome = transport_step(&current, &source, u0, horizon)?;
        let next = outcome.field;
        let last = SLICES - 1;
        let diff = probe_diff(next.slice(last), current.slice(last), &grid);
        let sampled = samples
            .iter()
            .map(|&t| probe_diff(&next.at_time(t), &current.at_time(t), &grid))
            .fold(0.0_f64, f64::max);
        let next_source = source_of(&next)?;
        let e_u = e_norm(next.slice(last).to_vec())?;
        let e_g = e_norm(next_source.slice(last).to_vec())?;

        let prev_diff = ledger.diffs[n - 1];
        let floor = ROUNDOFF_FLOOR * probe_norm(next.slice(last), &grid);
        let ratio = (n >= 2 && prev_diff > floor && diff > floor).then(|| diff / prev_diff);
        if n >= 2 && diff > prev_diff && prev_diff > floor {
            growth += 1;
            if growth >= GROWTH_RUN {
                return Ok(None);
            }
        } else {
            growth = 0;
        }

        ledger.iterates.push(next.final_state()?);
        ledger.e_norms.push(e_u);
        ledger.diffs.push(diff);
        ledger.sampled_diffs.push(sampled);
        ledger.ratios.push(ratio);
        ledger
            .source_ratios
            .push((e_u > 0.0).then(|| e_g / (e_u * e_u)));
        ledger.escaped.push(outcome.escaped);
        if !diff.is_finite() {
            return Err(Error::SchemeFailure(format!(
                "diff of iterate {n} is not finite"
            )));
        }

        ledger.last_trajectories.push(current);
        if ledger.last_trajectories.len() > 2 {
            ledger.last_trajectories.remove(0);
        }
        current = next;
        source = next_source;
    }
    ledger.last_trajectories.push(current);
    if ledger.last_trajectories.len() > 2 {
        ledger.last_trajectories.remove(0);
    }
    Ok(Some(ledger))
}
