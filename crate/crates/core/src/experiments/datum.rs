//! Initial data used by the scenarios, with analytic slopes where available.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{DecayClass, Grid, LineFunction};

/// A named initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Datum {
    Zero,
    /// `scale · ∫_{-∞}^x e^{−z²} dz`, with slope `scale · e^{−x²}`.
    GaussianAntiderivative {
        #[serde(default = "one")]
        scale: f64,
    },
    /// `−amplitude · x e^{−x²}`, minimum slope `−amplitude` at `x = 0`.
    Blowup {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · e^{−x²}`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for Datum {
    fn default() -> Self {
        Datum::GaussianAntiderivative { scale: 1.0 }
    }
}

impl Datum {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Datum::Zero => 0.0,
            Datum::GaussianAntiderivative { scale } => {
                scale * 0.5 * PI.sqrt() * (1.0 + libm::erf(x))
            }
            Datum::Blowup { amplitude } => -amplitude * x * (-x * x).exp(),
            Datum::Gaussian { amplitude } => amplitude * (-x * x).exp(),
        }
    }

    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            Datum::Zero => 0.0,
            Datum::GaussianAntiderivative { scale } => scale * (-x * x).exp(),
            Datum::Blowup { amplitude } => -amplitude * (1.0 - 2.0 * x * x) * (-x * x).exp(),
            Datum::Gaussian { amplitude } => -2.0 * amplitude * x * (-x * x).exp(),
        }
    }

    pub fn curvature(&self, x: f64) -> f64 {
        match *self {
            Datum::Zero => 0.0,
            Datum::GaussianAntiderivative { scale } => -2.0 * scale * x * (-x * x).exp(),
            Datum::Blowup { amplitude } => {
                -amplitude * (4.0 * x * x * x - 6.0 * x) * (-x * x).exp()
            }
            Datum::Gaussian { amplitude } => amplitude * (4.0 * x * x - 2.0) * (-x * x).exp(),
        }
    }

    pub fn decay_class(&self) -> DecayClass {
        match self {
            Datum::GaussianAntiderivative { .. } => DecayClass::BoundedNondecaying,
            _ => DecayClass::GaussianDecay,
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<LineFunction> {
        LineFunction::from_fn(grid, self.decay_class(), |x| self.value(x))
    }

    pub fn sample_slope(&self, grid: Grid) -> Result<LineFunction> {
        LineFunction::from_fn(grid, DecayClass::GaussianDecay, |x| self.slope(x))
    }

    /// Label and value of the most negative slope, located on the grid and refined by
    /// golden-section search on the analytic slope.
    pub fn min_slope(&self, grid: &Grid) -> (f64, f64) {
        let i = (0..grid.len())
            .min_by(|&a, &b| self.slope(grid.x(a)).total_cmp(&self.slope(grid.x(b))))
            .expect("grid is never empty");
        let h = grid.spacing();
        let (mut lo, mut hi) = (grid.x(i) - h, grid.x(i) + h);
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let a = hi - ratio * (hi - lo);
            let b = lo + ratio * (hi - lo);
            if self.slope(a) < self.slope(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let x = 0.5 * (lo + hi);
        let (xg, vg) = (grid.x(i), self.slope(grid.x(i)));
        if self.slope(x) <= vg {
            (x, self.slope(x))
        } else {
            (xg, vg)
        }
    }
}

/// Frequency range of [`random_band_limited`] samples.
pub const RANDOM_BAND: (f64, f64) = (1.0, 8.0);
/// Width of the Gaussian envelope of [`random_band_limited`] samples.
pub const RANDOM_ENVELOPE: f64 = 1.2;

/// A random superposition of 8 modes with frequencies in [`RANDOM_BAND`] under a
/// Gaussian envelope, so the spectrum is concentrated in that band.
pub fn random_band_limited(grid: Grid, rng: &mut impl Rng) -> Result<LineFunction> {
    let modes: Vec<(f64, f64, f64)> = (0..8)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(RANDOM_BAND.0..RANDOM_BAND.1),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let shift: f64 = rng.random_range(-2.0..2.0);
    LineFunction::from_fn(grid, DecayClass::GaussianDecay, |x| {
        let y = x - shift;
        let envelope = (-0.5 * (y / RANDOM_ENVELOPE).powi(2)).exp();
        envelope
            * modes
                .iter()
                .map(|(a, k, p)| a * (k * y + p).cos())
                .sum::<f64>()
    })
}

/// `count` samples from a generator seeded with `seed`.
pub fn random_band_limited_set(grid: Grid, seed: u64, count: usize) -> Result<Vec<LineFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_band_limited(grid, &mut rng))
        .collect()
}
