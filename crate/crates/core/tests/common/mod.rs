//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use hunter_saxton::experiments::Datum;
use hunter_saxton::grid::Grid;

/// Per-label state of the coupled characteristic system.
#[derive(Debug, Clone)]
pub struct Characteristics {
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    /// `u_x` along the characteristic.
    pub w: Vec<f64>,
    /// Jacobian `q_x`.
    pub jac: Vec<f64>,
}

impl Characteristics {
    pub fn from_datum(datum: &Datum, grid: &Grid) -> Self {
        let x = grid.points();
        Self {
            q: x.clone(),
            u: x.iter().map(|&y| datum.value(y)).collect(),
            w: x.iter().map(|&y| datum.slope(y)).collect(),
            jac: vec![1.0; x.len()],
        }
    }
}

/// Running label-trapezoid of `½ w² J`.
fn source(w: &[f64], jac: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..w.len() {
        let a = 0.5 * w[i - 1] * w[i - 1] * jac[i - 1];
        let b = 0.5 * w[i] * w[i] * jac[i];
        acc += 0.5 * h * (a + b);
        out.push(acc);
    }
    out
}

fn rate(s: &Characteristics, h: f64, forcing: f64) -> Characteristics {
    let f = source(&s.w, &s.jac, h);
    Characteristics {
        q: s.u.clone(),
        u: f.iter().map(|v| v + forcing).collect(),
        w: s.w.iter().map(|w| -0.5 * w * w).collect(),
        jac: s.w.iter().zip(&s.jac).map(|(w, j)| w * j).collect(),
    }
}

fn axpy(s: &Characteristics, k: &Characteristics, c: f64) -> Characteristics {
    let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * y).collect();
    Characteristics {
        q: f(&s.q, &k.q),
        u: f(&s.u, &k.u),
        w: f(&s.w, &k.w),
        jac: f(&s.jac, &k.jac),
    }
}

/// Classical RK4 on the coupled system with a fixed step, recomputing the source from
/// the evolving state at every stage. Returns the states at each of `times` (ascending).
pub fn integrate_characteristics(
    start: Characteristics,
    grid: &Grid,
    forcing: f64,
    dt: f64,
    times: &[f64],
) -> Vec<Characteristics> {
    let h = grid.spacing();
    let mut s = start;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target - 1e-12 {
            let step = dt.min(target - t);
            let k1 = rate(&s, h, forcing);
            let k2 = rate(&axpy(&s, &k1, 0.5 * step), h, forcing);
            let k3 = rate(&axpy(&s, &k2, 0.5 * step), h, forcing);
            let k4 = rate(&axpy(&s, &k3, step), h, forcing);
            let n = s.q.len();
            let combine = |a: &mut Vec<f64>, b1: &[f64], b2: &[f64], b3: &[f64], b4: &[f64]| {
                for i in 0..n {
                    a[i] += step / 6.0 * (b1[i] + 2.0 * b2[i] + 2.0 * b3[i] + b4[i]);
                }
            };
            combine(&mut s.q, &k1.q, &k2.q, &k3.q, &k4.q);
            combine(&mut s.u, &k1.u, &k2.u, &k3.u, &k4.u);
            combine(&mut s.w, &k1.w, &k2.w, &k3.w, &k4.w);
            combine(&mut s.jac, &k1.jac, &k2.jac, &k3.jac, &k4.jac);
            t += step;
        }
        out.push(s.clone());
    }
    out
}

/// RK4 for a scalar autonomous ODE `y′ = f(y)`.
pub fn rk4_scalar(f: impl Fn(f64) -> f64, y0: f64, t_end: f64, dt: f64) -> f64 {
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    let mut y = y0;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// RK4 for a non-autonomous scalar ODE `y′ = f(t, y)` from `t0` to `t1` (either direction).
pub fn rk4_scalar_t(f: impl Fn(f64, f64) -> f64, y0: f64, t0: f64, t1: f64, dt: f64) -> f64 {
    let steps = ((t1 - t0).abs() / dt).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let (mut t, mut y) = (t0, y0);
    for _ in 0..steps {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    y
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
