//! Method-of-lines integrator for the integral form on a fixed grid.
//!
//! Space uses the 4th-order differences and trapezoid running sums of
//! [`crate::grid`]; time uses classic RK4 with `dt = cfl·h / max(‖u‖_∞, 1e-8)`.
//! All points, boundaries included, are advanced with the same right-hand side.
//! Integration stops early when the gradient amplifies past a threshold, when the
//! step underflows, when the gradient is no longer resolved by the grid, or when
//! `‖u_x‖_{L²}` (conserved by the equation) drifts, i.e. the scheme has lost accuracy.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, LineFunction};
use crate::lagrangian::Forcing;

const MIN_SPEED: f64 = 1e-8;
const BLEND_ONSET: f64 = 50.0;
const DUMP_MAGIC: &[u8; 8] = b"HSTRAJ01";

/// Treatment of the advection term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    #[default]
    None,
    /// Blend central and first-order upwind advection where `|u_x|` exceeds 50,
    /// fully upwind from 100.
    UpwindBlend,
}

/// Time-stepping parameters and halt thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerianConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub limiter: Limiter,
    /// Halt when `‖u_x‖_∞` exceeds this multiple of `‖u_{0x}‖_∞`.
    pub amplification: f64,
    /// Halt when the step drops below this value.
    pub dt_floor: f64,
    /// Halt when `max_i |u_x[i+1] − u_x[i]|` exceeds this fraction of `‖u_x‖_∞`.
    pub resolution_limit: f64,
    /// Halt when `‖u_x‖_{L²}` drifts from its initial value by more than this fraction.
    pub conservation_limit: f64,
}

impl EulerianConfig {
    /// Defaults with outputs at `0` and `t_end`.
    pub fn new(t_end: f64) -> Self {
        Self {
            cfl: 0.4,
            t_end,
            output_times: vec![0.0, t_end],
            limiter: Limiter::None,
            amplification: 1e3,
            dt_floor: 1e-9,
            resolution_limit: 0.5,
            conservation_limit: 1e-3,
        }
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if self.output_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams(
                "output times must be strictly increasing".into(),
            ));
        }
        if self
            .output_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::InvalidParams(
                "output times must lie in [0, t_end]".into(),
            ));
        }
        if !(self.amplification > 1.0
            && self.dt_floor > 0.0
            && self.resolution_limit > 0.0
            && self.conservation_limit > 0.0)
        {
            return Err(Error::InvalidParams(
                "halt thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    Completed,
    Amplification,
    StepUnderflow,
    ResolutionLoss,
    ConservationLoss,
}

impl HaltReason {
    pub fn is_blowup(self) -> bool {
        self != HaltReason::Completed
    }
}

/// Per-step diagnostics: one entry per accepted RK4 step plus the initial state.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepMonitor {
    pub t: Vec<f64>,
    pub ux_sup: Vec<f64>,
    pub h1: Vec<f64>,
    pub u_sup: Vec<f64>,
    /// `max_i |u_x[i+1] − u_x[i]| / ‖u_x‖_∞`.
    pub roughness: Vec<f64>,
}

impl StepMonitor {
    fn push(&mut self, t: f64, d: &Diagnostics) {
        self.t.push(t);
        self.ux_sup.push(d.ux_sup);
        self.h1.push(d.h1);
        self.u_sup.push(d.u_sup);
        self.roughness.push(d.roughness);
    }
}

/// States at the output times reached (and at the halt time, if halted early).
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianTrajectory {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<LineFunction>,
    pub ux_sup_series: Vec<f64>,
    pub h1_series: Vec<f64>,
    pub monitor: StepMonitor,
    pub halt: HaltReason,
    pub halt_time: f64,
}

impl EulerianTrajectory {
    pub fn halted_early(&self) -> bool {
        self.halt.is_blowup()
    }

    /// Largest relative deviation of the `‖u_x‖_{L²}` monitor from its initial value up to `t_max`.
    pub fn h1_drift_until(&self, t_max: f64) -> f64 {
        let h0 = self.monitor.h1[0];
        if h0 == 0.0 {
            return self
                .monitor
                .h1
                .iter()
                .zip(&self.monitor.t)
                .filter(|(_, &t)| t <= t_max)
                .fold(0.0_f64, |m, (h, _)| m.max(h.abs()));
        }
        self.monitor
            .h1
            .iter()
            .zip(&self.monitor.t)
            .filter(|(_, &t)| t <= t_max)
            .fold(0.0_f64, |m, (h, _)| m.max((h - h0).abs() / h0))
    }

    /// Index of the stored state at time `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    }

    /// Writes `t, ‖u‖_∞, ‖u_x‖_∞, ‖u_x‖_{L²}, criterion_partial` rows at the stored times.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "u_sup", "ux_sup", "ux_l2", "criterion_partial"])?;
        for (k, &t) in self.times.iter().enumerate() {
            w.serialize((
                t,
                self.states[k].sup(),
                self.ux_sup_series[k],
                self.h1_series[k],
                criterion_integral_until(self, t),
            ))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Flat binary dump: magic, half-width (f64), point count (u64), time count (u64),
    /// the times, then the states row-major; all little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for t in &self.times {
            w.write_all(&t.to_le_bytes())?;
        }
        for s in &self.states {
            for v in s.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Contents of a state dump.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDump {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Reads a dump written by [`EulerianTrajectory::write_dump`].
pub fn read_dump<R: Read>(mut r: R) -> Result<StateDump> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::InvalidParams("not a trajectory dump".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let half_width = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let n_times = u64::from_le_bytes(b8) as usize;
    let grid = Grid::new(half_width, n)?;
    let mut read_f64 = || -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let times = (0..n_times)
        .map(|_| read_f64())
        .collect::<Result<Vec<_>>>()?;
    let states = (0..n_times)
        .map(|_| (0..n).map(|_| read_f64()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(StateDump {
        grid,
        times,
        states,
    })
}

struct Diagnostics {
    ux_sup: f64,
    h1: f64,
    u_sup: f64,
    roughness: f64,
}

/// Scratch buffers for right-hand-side evaluations on one grid.
struct Workspace {
    h: f64,
    ux: Vec<f64>,
    sq: Vec<f64>,
    source: Vec<f64>,
}

impl Workspace {
    fn new(grid: &Grid) -> Self {
        let n = grid.len();
        Self {
            h: grid.spacing(),
            ux: vec![0.0; n],
            sq: vec![0.0; n],
            source: vec![0.0; n],
        }
    }

    /// `out = −u u_x + ∫ ½u_x² + g`.
    fn rhs(
        &mut self,
        u: &[f64],
        forcing: Forcing,
        limiter: Limiter,
        stage: usize,
        t: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let h = self.h;
        grid::derivative_into(u, h, &mut self.ux);
        // running trapezoid sum of ½u_x², fused with the largest integrand value
        let quarter_h = 0.25 * h;
        let mut prev = self.ux[0] * self.ux[0];
        let mut acc = 0.0;
        self.source[0] = 0.0;
        for i in 1..u.len() {
            let sq = self.ux[i] * self.ux[i];
            acc += quarter_h * (prev + sq);
            self.source[i] = acc;
            prev = sq;
        }
        if !acc.is_finite() {
            let term = if self.ux.iter().any(|v| !v.is_finite()) {
                "u_x"
            } else {
                "source integral"
            };
            return Err(Error::NanInStage { stage, term, t });
        }
        if stage == 1
            && self.ux[0] * self.ux[0] > grid::DECAY_TOLERANCE * grid::sup_abs(&self.ux).powi(2)
        {
            return Err(Error::Truncation(format!(
                "u_x² does not decay at the left boundary at t = {t}"
            )));
        }
        let g = match forcing {
            Forcing::Closure(c) => 2.0 * c * acc,
            other => other.value(0.0),
        };
        match limiter {
            Limiter::None => {
                for (((o, &ui), &di), &si) in out.iter_mut().zip(u).zip(&self.ux).zip(&self.source)
                {
                    *o = -ui * di + si + g;
                }
            }
            Limiter::UpwindBlend => {
                let n = u.len();
                for i in 0..n {
                    let theta = ((self.ux[i].abs() - BLEND_ONSET) / BLEND_ONSET).clamp(0.0, 1.0);
                    let slope = if theta > 0.0 && i > 0 && i + 1 < n {
                        let upwind = if u[i] > 0.0 {
                            (u[i] - u[i - 1]) / h
                        } else {
                            (u[i + 1] - u[i]) / h
                        };
                        (1.0 - theta) * self.ux[i] + theta * upwind
                    } else {
                        self.ux[i]
                    };
                    out[i] = -u[i] * slope + self.source[i] + g;
                }
            }
        }
        if !grid::sum(out).is_finite() {
            return Err(Error::NanInStage {
                stage,
                term: "advection",
                t,
            });
        }
        Ok(())
    }

    fn diagnostics(&mut self, u: &[f64]) -> Diagnostics {
        grid::derivative_into(u, self.h, &mut self.ux);
        let ux_sup = grid::sup_abs(&self.ux);
        for (s, d) in self.sq.iter_mut().zip(&self.ux) {
            *s = d * d;
        }
        let h1 = grid::trapezoid(&self.sq, self.h).sqrt();
        for (s, w) in self.sq.iter_mut().zip(self.ux.windows(2)) {
            *s = w[1] - w[0];
        }
        let n = self.sq.len();
        let jump = grid::sup_abs(&self.sq[..n - 1]);
        Diagnostics {
            ux_sup,
            h1,
            u_sup: grid::sup_abs(u),
            roughness: if ux_sup > 0.0 { jump / ux_sup } else { 0.0 },
        }
    }
}

/// Right-hand side `−u u_x + ∫_{-∞}^x ½u_x² + g` without limiting.
///
/// For the closure forcing `g` is evaluated from the current `u_x`.
pub fn rhs(u: &LineFunction, forcing: Forcing) -> Result<LineFunction> {
    let mut ws = Workspace::new(u.grid());
    let mut out = vec![0.0; u.grid().len()];
    ws.rhs(u.values(), forcing, Limiter::None, 1, 0.0, &mut out)?;
    LineFunction::classified(*u.grid(), out)
}

/// Integrates from `u0` to `config.t_end` (or until a halt criterion fires).
pub fn integrate(
    u0: &LineFunction,
    config: &EulerianConfig,
    forcing: Forcing,
) -> Result<EulerianTrajectory> {
    config.validate()?;
    let grid = *u0.grid();
    let n = grid.len();
    let h = grid.spacing();
    let mut ws = Workspace::new(&grid);
    let mut u = u0.values().to_vec();
    let mut stage = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut k = vec![0.0; n];

    let mut traj = EulerianTrajectory {
        grid,
        times: Vec::new(),
        states: Vec::new(),
        ux_sup_series: Vec::new(),
        h1_series: Vec::new(),
        monitor: StepMonitor::default(),
        halt: HaltReason::Completed,
        halt_time: config.t_end,
    };
    let record =
        |traj: &mut EulerianTrajectory, t: f64, u: &[f64], d: &Diagnostics| -> Result<()> {
            traj.times.push(t);
            traj.states
                .push(LineFunction::classified(grid, u.to_vec())?);
            traj.ux_sup_series.push(d.ux_sup);
            traj.h1_series.push(d.h1);
            Ok(())
        };

    let d0 = ws.diagnostics(&u);
    let ux0_sup = d0.ux_sup;
    traj.monitor.push(0.0, &d0);
    let mut next_output = 0;
    if config.output_times.first() == Some(&0.0) {
        record(&mut traj, 0.0, &u, &d0)?;
        next_output = 1;
    }

    let mut t = 0.0;
    while t < config.t_end {
        let mut dt = config.cfl * h / grid::sup_abs(&u).max(MIN_SPEED);
        if dt < config.dt_floor {
            traj.halt = HaltReason::StepUnderflow;
            break;
        }
        let target = config
            .output_times
            .get(next_output)
            .copied()
            .unwrap_or(config.t_end);
        let mut landing = None;
        if t + dt >= target * (1.0 - 1e-14) {
            dt = target - t;
            landing = Some(target);
        }

        ws.rhs(&u, forcing, config.limiter, 1, t, &mut k)?;
        for i in 0..n {
            acc[i] = u[i] + dt / 6.0 * k[i];
            stage[i] = u[i] + 0.5 * dt * k[i];
        }
        ws.rhs(&stage, forcing, config.limiter, 2, t + 0.5 * dt, &mut k)?;
        for i in 0..n {
            acc[i] += dt / 3.0 * k[i];
            stage[i] = u[i] + 0.5 * dt * k[i];
        }
        ws.rhs(&stage, forcing, config.limiter, 3, t + 0.5 * dt, &mut k)?;
        for i in 0..n {
            acc[i] += dt / 3.0 * k[i];
            stage[i] = u[i] + dt * k[i];
        }
        ws.rhs(&stage, forcing, config.limiter, 4, t + dt, &mut k)?;
        for i in 0..n {
            u[i] = acc[i] + dt / 6.0 * k[i];
        }
        if !grid::sum(&u).is_finite() {
            return Err(Error::NanInStage {
                stage: 4,
                term: "update",
                t,
            });
        }
        t = landing.unwrap_or(t + dt);

        let d = ws.diagnostics(&u);
        traj.monitor.push(t, &d);
        let is_output = landing.is_some() && next_output < config.output_times.len();
        if is_output {
            record(&mut traj, t, &u, &d)?;
            next_output += 1;
        }
        let halt = if d.ux_sup > config.amplification * ux0_sup {
            Some(HaltReason::Amplification)
        } else if d.roughness > config.resolution_limit {
            Some(HaltReason::ResolutionLoss)
        } else if d0.h1 > 0.0 && (d.h1 - d0.h1).abs() > config.conservation_limit * d0.h1 {
            Some(HaltReason::ConservationLoss)
        } else {
            None
        };
        if let Some(reason) = halt {
            traj.halt = reason;
            if !is_output {
                record(&mut traj, t, &u, &d)?;
            }
            break;
        }
    }
    traj.halt_time = if traj.halt.is_blowup() {
        *traj.monitor.t.last().unwrap_or(&0.0)
    } else {
        t
    };
    Ok(traj)
}

/// Trapezoid-in-time integral of `‖u_x‖_∞` over every step of the trajectory.
pub fn criterion_integral(traj: &EulerianTrajectory) -> f64 {
    integrate_series(&traj.monitor.t, &traj.monitor.ux_sup, f64::INFINITY)
}

/// The same integral truncated at `t_max` (linear interpolation in the last step).
pub fn criterion_integral_until(traj: &EulerianTrajectory, t_max: f64) -> f64 {
    integrate_series(&traj.monitor.t, &traj.monitor.ux_sup, t_max)
}

fn integrate_series(t: &[f64], v: &[f64], t_max: f64) -> f64 {
    let mut total = 0.0;
    for i in 1..t.len() {
        let (t0, t1) = (t[i - 1], t[i]);
        if t0 >= t_max {
            break;
        }
        if t1 <= t_max {
            total += 0.5 * (t1 - t0) * (v[i - 1] + v[i]);
        } else {
            let w = (t_max - t0) / (t1 - t0);
            let vm = v[i - 1] + w * (v[i] - v[i - 1]);
            total += 0.5 * (t_max - t0) * (v[i - 1] + vm);
        }
    }
    total
}
