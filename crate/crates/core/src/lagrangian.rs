//! Closed-form solution along characteristics.
//!
//! Along the flow `q_t = u(t, q)`, `q(0, x) = x`, the slope obeys the Riccati
//! equation `w' = −w²/2` and `u_x² q_x` is conserved, so the source
//! `∫_{-∞}^{q(t,x)} ½u_x²` stays equal to `F(x) = ∫_{-∞}^x ½u_{0x}²`. With a
//! time-constant forcing `c` this gives, for `D = 1 + (t/2) u_{0x}(x)`,
//!
//! * `q(t, x) = x + t u_0(x) + (t²/2)(F(x) + c)`
//! * `u(t, q) = u_0(x) + t (F(x) + c)`
//! * `q_x = D²`, `u_x(t, q) = u_{0x}(x) / D`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, DecayClass, Grid, LineFunction};

/// A snapshot is invalid once `min_x (1 + (t/2) u_{0x})` drops to this margin.
pub const BLOWUP_MARGIN: f64 = 1e-6;

/// Below this value of `1 + (t/2) u_{0x}` resampling falls back to linear interpolation.
const CUBIC_MARGIN: f64 = 1e-3;

/// Forcing term `g(t)` of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum Forcing {
    #[default]
    Zero,
    /// `g(t) = c`.
    Constant(f64),
    /// `g(t) = C ∫_ℝ u_x² dz`.
    Closure(f64),
}

impl Forcing {
    /// Value of `g` for a state whose total energy is `∫_ℝ ½u_x² = energy`.
    pub fn value(&self, energy: f64) -> f64 {
        match *self {
            Forcing::Zero => 0.0,
            Forcing::Constant(c) => c,
            Forcing::Closure(c) => 2.0 * c * energy,
        }
    }
}

/// Per-label initial data from which every later time is reconstructed.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicState {
    grid: Grid,
    u0: LineFunction,
    u0x: LineFunction,
    energy: LineFunction,
    forcing: Forcing,
    forcing_value: f64,
}

/// Builds the state, differentiating `u0` on its grid.
pub fn init_state(u0: &LineFunction, forcing: Forcing) -> Result<CharacteristicState> {
    let u0x = grid::derivative(u0)?;
    init_state_with_slope(u0, &u0x, forcing)
}

/// Builds the state from `u0` and a separately supplied slope `u0x` (e.g. analytic).
pub fn init_state_with_slope(
    u0: &LineFunction,
    u0x: &LineFunction,
    forcing: Forcing,
) -> Result<CharacteristicState> {
    if u0.grid() != u0x.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *u0.grid();
    let half_sq: Vec<f64> = u0x.values().iter().map(|v| 0.5 * v * v).collect();
    if !grid::left_decays(&half_sq) {
        return Err(Error::Truncation(
            "u0x² does not decay at the left boundary; the source integral from -inf is invalid"
                .into(),
        ));
    }
    let mut f = vec![0.0; grid.len()];
    grid::cumulative_trapezoid_into(&half_sq, grid.spacing(), &mut f);
    let energy = LineFunction::new(grid, f, DecayClass::BoundedNondecaying)?;
    let total = *energy.values().last().unwrap_or(&0.0);
    Ok(CharacteristicState {
        grid,
        u0: u0.clone(),
        u0x: u0x.clone(),
        energy,
        forcing,
        forcing_value: forcing.value(total),
    })
}

impl CharacteristicState {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn u0(&self) -> &LineFunction {
        &self.u0
    }

    pub fn u0x(&self) -> &LineFunction {
        &self.u0x
    }

    /// `F(x) = ∫_{-∞}^x ½u_{0x}²`.
    pub fn cumulative_energy(&self) -> &LineFunction {
        &self.energy
    }

    /// `F(+L)`, half the squared `L²` norm of `u_{0x}`.
    pub fn total_energy(&self) -> f64 {
        *self.energy.values().last().unwrap_or(&0.0)
    }

    pub fn forcing(&self) -> Forcing {
        self.forcing
    }

    /// The time-constant value of `g` along the exact solution.
    pub fn forcing_value(&self) -> f64 {
        self.forcing_value
    }

    /// Label and value of the most negative slope, refined by a parabola through
    /// the grid minimum and its neighbours.
    pub fn min_slope(&self) -> (f64, f64) {
        let v = self.u0x.values();
        let (i, &fi) = v
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("grid is never empty");
        if i == 0 || i + 1 == v.len() {
            return (self.grid.x(i), fi);
        }
        let (fm, fp) = (v[i - 1], v[i + 1]);
        let curvature = fp - 2.0 * fi + fm;
        if curvature <= 0.0 {
            return (self.grid.x(i), fi);
        }
        let offset = 0.5 * (fm - fp) / curvature;
        let value = fi - (fp - fm).powi(2) / (8.0 * curvature);
        (self.grid.x(i) + offset * self.grid.spacing(), value.min(fi))
    }
}

/// `w(t)` for the Riccati equation `w' = −w²/2` with `w(0) = a`.
///
/// Returns 0 when `a = 0` and `−∞` at or after the blow-up time `−2/a`.
pub fn riccati_slope(a: f64, t: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let d = 1.0 + 0.5 * t * a;
    if d <= 0.0 {
        f64::NEG_INFINITY
    } else {
        a / d
    }
}

/// `u_x(t, q(t, x))` at an arbitrary label, interpolating `u_{0x}` between grid points.
pub fn riccati_ux(state: &CharacteristicState, x_label: f64, t: f64) -> f64 {
    riccati_slope(state.u0x.evaluate_cubic(x_label), t)
}

/// `−2 / min u_{0x}`, or `+∞` when the slope is nowhere negative.
///
/// Negative slopes smaller than [`grid::DECAY_TOLERANCE`] times `‖u_{0x}‖_∞` are
/// differencing noise and count as zero.
pub fn blowup_time(state: &CharacteristicState) -> f64 {
    let (_, m) = state.min_slope();
    if m >= -grid::DECAY_TOLERANCE * state.u0x.sup() {
        f64::INFINITY
    } else {
        -2.0 / m
    }
}

/// The solution at time `t` described over labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSnapshot {
    pub t: f64,
    pub q: LineFunction,
    pub qx: LineFunction,
    pub ux_along: LineFunction,
    pub u_along: LineFunction,
    pub valid: bool,
    /// `min_x (1 + (t/2) u_{0x})`.
    pub margin: f64,
}

/// Evaluates the closed form at time `t ≥ 0`.
///
/// Past blow-up the snapshot is returned with `valid = false`; its slopes use the
/// margin floored at [`BLOWUP_MARGIN`] so the fields stay finite.
pub fn snapshot(state: &CharacteristicState, t: f64) -> Result<LagrangianSnapshot> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "snapshot time must be finite and >= 0, got {t}"
        )));
    }
    let n = state.grid.len();
    let c = state.forcing_value;
    let (u0, a, f) = (state.u0.values(), state.u0x.values(), state.energy.values());
    let mut q = Vec::with_capacity(n);
    let mut qx = Vec::with_capacity(n);
    let mut ux = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut margin = f64::INFINITY;
    for i in 0..n {
        let d = 1.0 + 0.5 * t * a[i];
        margin = margin.min(d);
        let source = f[i] + c;
        q.push(state.grid.x(i) + t * u0[i] + 0.5 * t * t * source);
        qx.push(d * d);
        ux.push(a[i] / d.max(BLOWUP_MARGIN));
        u.push(u0[i] + t * source);
    }
    let grid = state.grid;
    Ok(LagrangianSnapshot {
        t,
        q: LineFunction::new(grid, q, DecayClass::BoundedNondecaying)?,
        qx: LineFunction::new(grid, qx, DecayClass::BoundedNondecaying)?,
        ux_along: LineFunction::classified(grid, ux)?,
        u_along: LineFunction::classified(grid, u)?,
        valid: margin > BLOWUP_MARGIN,
        margin,
    })
}

impl LagrangianSnapshot {
    /// Label-space quadrature of `u_x² q_x`, equal to `‖u_x(t)‖²_{L²}`.
    pub fn h1_squared(&self) -> f64 {
        let w: Vec<f64> = self
            .ux_along
            .values()
            .iter()
            .zip(self.qx.values())
            .map(|(u, q)| u * u * q)
            .collect();
        grid::trapezoid(&w, self.q.grid().spacing())
    }

    /// Writes `label_x,q,qx,u,ux` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["label_x", "q", "qx", "u", "ux"])?;
        let grid = self.q.grid();
        for i in 0..grid.len() {
            w.serialize((
                grid.x(i),
                self.q.values()[i],
                self.qx.values()[i],
                self.u_along.values()[i],
                self.ux_along.values()[i],
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Eulerian fields resampled from a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerianFields {
    pub u: LineFunction,
    pub ux: LineFunction,
    /// Some target fell outside `[q(−L), q(L)]` and took the end value.
    pub clamped: bool,
    /// `‖derivative(u) − ux‖_∞`, an internal consistency measure.
    pub consistency: f64,
}

/// Resamples a valid snapshot onto an Eulerian grid by inverting `q`.
///
/// Inside each label cell `q` and `u` are cubic Hermite interpolants with their exact
/// label derivatives `q_x` and `u_x q_x`; cells where those slopes would break
/// monotonicity, or where `1 + (t/2) u_{0x}` is small, use linear interpolation.
pub fn to_eulerian(snap: &LagrangianSnapshot, target: &Grid) -> Result<EulerianFields> {
    if !snap.valid {
        return Err(Error::InvalidSnapshot {
            t: snap.t,
            margin: snap.margin,
        });
    }
    let qv = snap.q.values();
    grid::ensure_increasing(qv)?;
    let label_grid = *snap.q.grid();
    let h = label_grid.spacing();
    let n = qv.len();
    let (qx, ua, uxa) = (
        snap.qx.values(),
        snap.u_along.values(),
        snap.ux_along.values(),
    );
    let mut u = Vec::with_capacity(target.len());
    let mut ux = Vec::with_capacity(target.len());
    let mut clamped = false;
    for k in 0..target.len() {
        let y = target.x(k);
        if y <= qv[0] || y >= qv[n - 1] {
            let i = if y <= qv[0] { 0 } else { n - 1 };
            clamped |= y < qv[0] || y > qv[n - 1];
            u.push(ua[i]);
            ux.push(uxa[i]);
            continue;
        }
        let i = grid::cell_index(qv, y);
        let delta = qv[i + 1] - qv[i];
        let (m0, m1) = (qx[i] * h, qx[i + 1] * h);
        let (alpha, beta) = (m0 / delta, m1 / delta);
        let cubic =
            qx[i].min(qx[i + 1]).sqrt() > CUBIC_MARGIN && alpha * alpha + beta * beta <= 9.0;
        if cubic {
            let s = solve_hermite(qv[i], qv[i + 1], m0, m1, y);
            let du0 = uxa[i] * qx[i] * h;
            let du1 = uxa[i + 1] * qx[i + 1] * h;
            u.push(hermite(ua[i], ua[i + 1], du0, du1, s));
            ux.push(grid::lagrange4(uxa, &label_grid, label_grid.x(i) + s * h));
        } else {
            let s = (y - qv[i]) / delta;
            u.push((1.0 - s) * ua[i] + s * ua[i + 1]);
            ux.push((1.0 - s) * uxa[i] + s * uxa[i + 1]);
        }
    }
    let u = LineFunction::classified(*target, u)?;
    let ux = LineFunction::classified(*target, ux)?;
    let du = grid::derivative(&u)?;
    let consistency = du
        .values()
        .iter()
        .zip(ux.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(EulerianFields {
        u,
        ux,
        clamped,
        consistency,
    })
}

fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * m1
}

fn hermite_slope(p0: f64, p1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * p0
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (-6.0 * s2 + 6.0 * s) * p1
        + (3.0 * s2 - 2.0 * s) * m1
}

/// Solves `H(s) = y` on `[0, 1]` for a monotone cubic Hermite segment (safeguarded Newton).
fn solve_hermite(p0: f64, p1: f64, m0: f64, m1: f64, y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut s = (y - p0) / (p1 - p0);
    for _ in 0..60 {
        let r = hermite(p0, p1, m0, m1, s) - y;
        if r == 0.0 {
            return s;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = hermite_slope(p0, p1, m0, m1, s);
        let mut next = s - r / d;
        if !(d > 0.0) || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-16 {
            return next;
        }
        s = next;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn erf_datum(grid: Grid) -> LineFunction {
        let c = PI.sqrt() / 2.0;
        LineFunction::from_fn(grid, DecayClass::BoundedNondecaying, |x| {
            c * (1.0 + libm::erf(x))
        })
        .unwrap()
    }

    fn std_grid() -> Grid {
        Grid::new(12.0, 4096).unwrap()
    }

    #[test]
    fn test_init_state_examples() {
        let g = std_grid();
        let zero = init_state(&LineFunction::zeros(g), Forcing::Zero).unwrap();
        assert!(zero.cumulative_energy().values().iter().all(|&v| v == 0.0));
        assert_eq!(blowup_time(&zero), f64::INFINITY);

        let s = init_state(&erf_datum(g), Forcing::Zero).unwrap();
        let target = 0.25 * (2.0 * PI).sqrt();
        assert!((s.total_energy() - target).abs() < 1e-8);
        assert!(s
            .cumulative_energy()
            .values()
            .windows(2)
            .all(|w| w[1] >= w[0]));
        assert_eq!(blowup_time(&s), f64::INFINITY);
        let l2 = grid::lp_norm(s.u0x(), 2.0).unwrap();
        assert!((s.total_energy() - 0.5 * l2 * l2).abs() < 1e-12);

        let b =
            LineFunction::from_fn(g, DecayClass::GaussianDecay, |x| -x * (-x * x).exp()).unwrap();
        let s = init_state(&b, Forcing::Zero).unwrap();
        let (x0, m) = s.min_slope();
        assert!(x0.abs() < 1e-3);
        assert!((m + 1.0).abs() < 1e-8);
        assert!((blowup_time(&s) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn test_riccati_examples() {
        assert_eq!(riccati_slope(-1.0, 1.0), -2.0);
        assert_eq!(riccati_slope(0.0, 7.0), 0.0);
        assert_eq!(riccati_slope(1.0, 2.0), 0.5);
        assert_eq!(riccati_slope(-1.0, 2.0), f64::NEG_INFINITY);
        assert_eq!(riccati_slope(-1.0, 3.0), f64::NEG_INFINITY);
        // RK4 on w' = -w^2/2, step 1e-4
        let mut w = 1.0_f64;
        let dt = 1e-4;
        for _ in 0..20_000 {
            let f = |w: f64| -0.5 * w * w;
            let k1 = f(w);
            let k2 = f(w + 0.5 * dt * k1);
            let k3 = f(w + 0.5 * dt * k2);
            let k4 = f(w + dt * k3);
            w += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        assert!((w - 0.5).abs() < 1e-12);
    }

    #[test]
    fn test_snapshot_zero_and_closed_form() {
        let g = std_grid();
        let zero = init_state(&LineFunction::zeros(g), Forcing::Zero).unwrap();
        let s = snapshot(&zero, 3.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(s.q.values()[i], g.x(i));
            assert_eq!(s.u_along.values()[i], 0.0);
        }

        let st = init_state(&erf_datum(g), Forcing::Zero).unwrap();
        let s = snapshot(&st, 1.0).unwrap();
        let mid = g.nearest_index(0.0);
        let a = st.u0x().values()[mid];
        assert!((s.qx.values()[mid] - (1.0 + 0.5 * a).powi(2)).abs() < 1e-12);
        for i in 0..g.len() {
            let a = st.u0x().values()[i];
            assert!((s.ux_along.values()[i].powi(2) * s.qx.values()[i] - a * a).abs() < 1e-8);
        }
        assert!(s.valid);
    }

    #[test]
    fn test_qx_at_unit_slope() {
        let g = Grid::new(8.0, 1024).unwrap();
        let u0 =
            LineFunction::from_fn(g, DecayClass::GaussianDecay, |x| x * (-x * x).exp()).unwrap();
        let u0x = LineFunction::from_fn(g, DecayClass::GaussianDecay, |x| {
            (1.0 - 2.0 * x * x) * (-x * x).exp()
        })
        .unwrap();
        let st = init_state_with_slope(&u0, &u0x, Forcing::Zero).unwrap();
        let s = snapshot(&st, 1.0).unwrap();
        // label x = 0 is not on an even grid, so interpolate qx there
        let qx0 = s.qx.evaluate_cubic(0.0);
        assert!((qx0 - 2.25).abs() < 1e-6);
    }

    #[test]
    fn test_invalid_after_blowup() {
        let g = std_grid();
        let b =
            LineFunction::from_fn(g, DecayClass::GaussianDecay, |x| -x * (-x * x).exp()).unwrap();
        let st = init_state(&b, Forcing::Zero).unwrap();
        let s = snapshot(&st, 2.5).unwrap();
        assert!(!s.valid);
        assert!(s.ux_along.values().iter().all(|v| v.is_finite()));
        assert!(matches!(
            to_eulerian(&s, &g),
            Err(Error::InvalidSnapshot { .. })
        ));
    }

    #[test]
    fn test_to_eulerian_examples() {
        let g = std_grid();
        let zero = init_state(&LineFunction::zeros(g), Forcing::Zero).unwrap();
        let e = to_eulerian(&snapshot(&zero, 1.0).unwrap(), &g).unwrap();
        assert!(e.u.values().iter().all(|&v| v == 0.0));
        assert!(e.ux.values().iter().all(|&v| v == 0.0));

        let st = init_state(&erf_datum(g), Forcing::Zero).unwrap();
        let e = to_eulerian(&snapshot(&st, 1.0).unwrap(), &g).unwrap();
        assert!(e.consistency <= 1e-3, "consistency {}", e.consistency);
        let a = grid::lp_norm(st.u0x(), 2.0).unwrap();
        let b = grid::lp_norm(&e.ux, 2.0).unwrap();
        assert!((b / a - 1.0).abs() < 1e-6, "relative {}", b / a - 1.0);
    }

    #[test]
    fn test_constant_forcing_shifts() {
        let g = std_grid();
        let st0 = init_state(&erf_datum(g), Forcing::Zero).unwrap();
        let stc = init_state(&erf_datum(g), Forcing::Constant(0.3)).unwrap();
        let a = snapshot(&st0, 1.5).unwrap();
        let b = snapshot(&stc, 1.5).unwrap();
        for i in 0..g.len() {
            assert!((b.u_along.values()[i] - a.u_along.values()[i] - 0.45).abs() < 1e-12);
            assert!((b.q.values()[i] - a.q.values()[i] - 0.3 * 1.125).abs() < 1e-12);
            assert_eq!(b.ux_along.values()[i], a.ux_along.values()[i]);
        }
        let closure = init_state(&erf_datum(g), Forcing::Closure(0.5)).unwrap();
        assert!((closure.forcing_value() - closure.total_energy()).abs() < 1e-15);
    }

    #[test]
    fn test_snapshot_csv_header() {
        let g = Grid::new(6.0, 16).unwrap();
        let st = init_state(&LineFunction::zeros(g), Forcing::Zero).unwrap();
        let mut out = Vec::new();
        snapshot(&st, 0.5).unwrap().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("label_x,q,qx,u,ux\n"));
        assert_eq!(text.lines().count(), 17);
    }
}
