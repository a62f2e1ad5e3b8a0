//! Uniform grids on a truncated line and the sampled functions that live on them.
//!
//! The line is truncated to `[-L, L]` and sampled at `n` equispaced points. Every
//! other module consumes the kernels here: 4th-order finite differences, trapezoid
//! quadrature and running sums, `L^p` norms and inversion of monotone maps.

use crate::error::{Error, Result};

/// Relative size a decaying function may keep at the boundary points.
pub const DECAY_TOLERANCE: f64 = 1e-10;

/// Uniform sampling of `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidHalfWidth(half_width));
        }
        if n_points < 16 {
            return Err(Error::GridTooSmall(n_points));
        }
        if !n_points.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n_points));
        }
        let spacing = 2.0 * half_width / (n_points - 1) as f64;
        Ok(Self {
            half_width,
            n_points,
            spacing,
        })
    }

    /// Smallest power-of-two grid with the given spacing whose half-width reaches `min_half_width`.
    pub fn with_spacing(spacing: f64, min_half_width: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParams(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut n = 16usize;
        while spacing * (n - 1) as f64 / 2.0 < min_half_width {
            n *= 2;
            if n > 1 << 26 {
                return Err(Error::InvalidParams(format!(
                    "half-width {min_half_width} at spacing {spacing} needs more than 2^26 points"
                )));
            }
        }
        Self::new(spacing * (n - 1) as f64 / 2.0, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of the `i`-th point.
    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the grid point closest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let s = ((x + self.half_width) / self.spacing).round();
        s.clamp(0.0, (self.n_points - 1) as f64) as usize
    }
}

/// How a sampled function behaves towards the ends of the truncated line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    CompactlySupported,
    GaussianDecay,
    /// Bounded, decaying only at the left end (e.g. an antiderivative of a bump).
    BoundedNondecaying,
}

impl DecayClass {
    pub fn decays(self) -> bool {
        !matches!(self, DecayClass::BoundedNondecaying)
    }
}

/// Samples of a real function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    grid: Grid,
    values: Vec<f64>,
    decay: DecayClass,
}

impl LineFunction {
    /// Validates finiteness and, for decaying classes, the boundary truncation bound.
    pub fn new(grid: Grid, values: Vec<f64>, decay: DecayClass) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values, "line function")?;
        if decay.decays() && !boundaries_decay(&values) {
            let max = sup_abs(&values);
            return Err(Error::Truncation(format!(
                "boundary values {:e}, {:e} exceed {DECAY_TOLERANCE:e} x max |f| = {max:e}",
                values[0],
                values[values.len() - 1]
            )));
        }
        Ok(Self {
            grid,
            values,
            decay,
        })
    }

    pub fn from_fn(grid: Grid, decay: DecayClass, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values, decay)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            decay: DecayClass::CompactlySupported,
        }
    }

    /// Builds a function classifying its decay from the actual boundary values.
    pub fn classified(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let decay = if boundaries_decay(&values) {
            DecayClass::GaussianDecay
        } else {
            DecayClass::BoundedNondecaying
        };
        Self::new(grid, values, decay)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay
    }

    /// `c * f`, keeping the decay class.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| c * v).collect();
        Self::new(self.grid, values, self.decay)
    }

    /// Pointwise `f - g` on a shared grid, classified by its boundary values.
    pub fn sub(&self, other: &LineFunction) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::classified(self.grid, values)
    }

    /// Piecewise-linear evaluation, clamped to the end values outside `[-L, L]`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = (x + g.half_width) / g.spacing;
        if s <= 0.0 {
            return self.values[0];
        }
        let last = g.n_points - 1;
        if s >= last as f64 {
            return self.values[last];
        }
        let i = (s.floor() as usize).min(last - 1);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    /// Four-point Lagrange interpolation (cubic, exact for cubics), clamped to the grid.
    pub fn evaluate_cubic(&self, x: f64) -> f64 {
        lagrange4(&self.values, &self.grid, x)
    }

    /// Largest absolute sample.
    pub fn sup(&self) -> f64 {
        sup_abs(&self.values)
    }
}

pub(crate) fn check_finite(values: &[f64], context: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            context: context.to_string(),
            index,
        }),
        None => Ok(()),
    }
}

pub(crate) fn sup_abs(values: &[f64]) -> f64 {
    let mut lanes = [0.0_f64; 4];
    let chunks = values.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] = lanes[k].max(c[k].abs());
        }
    }
    let m = tail.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    lanes.iter().fold(m, |a, &b| a.max(b))
}

/// Sum with four independent accumulators.
pub(crate) fn sum(values: &[f64]) -> f64 {
    let mut lanes = [0.0_f64; 4];
    let chunks = values.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] += c[k];
        }
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail.iter().sum::<f64>()
}

fn boundaries_decay(values: &[f64]) -> bool {
    let bound = DECAY_TOLERANCE * sup_abs(values);
    values[0].abs() <= bound && values[values.len() - 1].abs() <= bound
}

/// True when the left boundary value is negligible relative to the maximum.
pub(crate) fn left_decays(values: &[f64]) -> bool {
    values[0].abs() <= DECAY_TOLERANCE * sup_abs(values)
}

/// Finite-difference derivative of raw samples with spacing `h`.
///
/// 4th-order central in the interior, 2nd-order central one point in from each end
/// and 2nd-order one-sided at the ends. Requires at least five samples.
pub(crate) fn derivative_into(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    debug_assert!(n >= 5 && out.len() == n);
    let c4 = 1.0 / (12.0 * h);
    let c2 = 1.0 / (2.0 * h);
    for i in 2..n - 2 {
        out[i] = (8.0 * (f[i + 1] - f[i - 1]) - (f[i + 2] - f[i - 2])) * c4;
    }
    out[1] = (f[2] - f[0]) * c2;
    out[n - 2] = (f[n - 1] - f[n - 3]) * c2;
    out[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) * c2;
    out[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) * c2;
}

/// Trapezoid running sum from the left end: `out[0] = 0`.
pub(crate) fn cumulative_trapezoid_into(f: &[f64], h: f64, out: &mut [f64]) {
    let half = 0.5 * h;
    let mut acc = 0.0;
    out[0] = 0.0;
    for i in 1..f.len() {
        acc += half * (f[i - 1] + f[i]);
        out[i] = acc;
    }
}

/// Trapezoid quadrature over the whole grid.
pub(crate) fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    h * (sum(f) - 0.5 * (f[0] + f[n - 1]))
}

/// Four-point Lagrange interpolation of samples on `grid` at `x`.
pub(crate) fn lagrange4(values: &[f64], grid: &Grid, x: f64) -> f64 {
    let n = grid.n_points;
    let s = ((x + grid.half_width) / grid.spacing).clamp(0.0, (n - 1) as f64);
    let i0 = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let t = s - i0 as f64;
    let (t0, t1, t2, t3) = (t, t - 1.0, t - 2.0, t - 3.0);
    let w0 = -t1 * t2 * t3 / 6.0;
    let w1 = t0 * t2 * t3 / 2.0;
    let w2 = -t0 * t1 * t3 / 2.0;
    let w3 = t0 * t1 * t2 / 6.0;
    w0 * values[i0] + w1 * values[i0 + 1] + w2 * values[i0 + 2] + w3 * values[i0 + 3]
}

/// Derivative of a sampled function on its own grid.
///
/// The result keeps the decay class of decaying inputs; for a bounded non-decaying
/// input the class is inferred from the boundary values of the derivative.
pub fn derivative(f: &LineFunction) -> Result<LineFunction> {
    let n = f.grid.len();
    if n < 16 {
        return Err(Error::GridTooSmall(n));
    }
    let mut out = vec![0.0; n];
    derivative_into(&f.values, f.grid.spacing, &mut out);
    match f.decay {
        DecayClass::BoundedNondecaying => LineFunction::classified(f.grid, out),
        decay => {
            check_finite(&out, "derivative")?;
            Ok(LineFunction {
                grid: f.grid,
                values: out,
                decay,
            })
        }
    }
}

/// `x -> ∫_{-L}^x f`, the truncation of `∫_{-∞}^x f` for left-decaying integrands.
pub fn cumulative_integral(f: &LineFunction) -> Result<LineFunction> {
    if !f.decay.decays() {
        return Err(Error::Truncation(
            "cumulative integral from -inf needs a decaying integrand, got a bounded non-decaying one"
                .into(),
        ));
    }
    let mut out = vec![0.0; f.grid.len()];
    cumulative_trapezoid_into(&f.values, f.grid.spacing, &mut out);
    check_finite(&out, "cumulative integral")?;
    Ok(LineFunction {
        grid: f.grid,
        values: out,
        decay: DecayClass::BoundedNondecaying,
    })
}

/// `L^p` norm by trapezoid quadrature of `|f|^p`; `p = ∞` gives the sample maximum.
pub fn lp_norm(f: &LineFunction, p: f64) -> Result<f64> {
    lp_norm_of(f.values(), f.grid.spacing, p)
}

pub(crate) fn lp_norm_of(values: &[f64], h: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(sup_abs(values));
    }
    let scale = sup_abs(values);
    if scale == 0.0 {
        return Ok(0.0);
    }
    // Normalising by the maximum keeps |f|^p in range for large p.
    let powered: Vec<f64> = values.iter().map(|v| (v.abs() / scale).powf(p)).collect();
    Ok(scale * trapezoid(&powered, h).powf(1.0 / p))
}

/// Labels obtained by inverting a monotone map, with per-target clamp flags.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneInverse {
    pub labels: Vec<f64>,
    pub clamped: Vec<bool>,
}

impl MonotoneInverse {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }
}

/// Piecewise-linear inverse of a strictly increasing sampled map `x -> q(x)`.
///
/// Targets outside `[q(-L), q(L)]` are clamped to the end labels and flagged.
pub fn monotone_invert(q: &LineFunction, targets: &[f64]) -> Result<MonotoneInverse> {
    let qv = q.values();
    ensure_increasing(qv)?;
    let grid = q.grid();
    let n = qv.len();
    let mut labels = Vec::with_capacity(targets.len());
    let mut clamped = Vec::with_capacity(targets.len());
    for &y in targets {
        if y <= qv[0] || y >= qv[n - 1] {
            let out_of_range = y < qv[0] || y > qv[n - 1];
            labels.push(if y <= qv[0] { grid.x(0) } else { grid.x(n - 1) });
            clamped.push(out_of_range);
            continue;
        }
        let i = cell_index(qv, y);
        let w = (y - qv[i]) / (qv[i + 1] - qv[i]);
        labels.push(grid.x(i) + w * grid.spacing());
        clamped.push(false);
    }
    Ok(MonotoneInverse { labels, clamped })
}

pub(crate) fn ensure_increasing(values: &[f64]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonMonotone {
                index: i,
                left: w[0],
                right: w[1],
            });
        }
    }
    Ok(())
}

/// Index `i` with `q[i] <= y < q[i+1]` for `y` strictly inside the range of increasing `q`.
pub(crate) fn cell_index(q: &[f64], y: f64) -> usize {
    let k = q.partition_point(|&v| v <= y);
    k.saturating_sub(1).min(q.len() - 2)
}
