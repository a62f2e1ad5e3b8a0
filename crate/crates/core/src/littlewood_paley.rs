//! Dyadic frequency decomposition and Besov-type norms of sampled functions.
//!
//! The radial profile `χ` equals 1 on `|ξ| ≤ 3/4` and falls smoothly to 0 on
//! `[3/4, 0.76]`; the annular profile is `φ(ξ) = χ(ξ/2) − χ(ξ)`, supported in
//! `[3/4, 1.52] ⊂ [3/4, 8/3]`. Because the blocks telescope,
//! `Σ_{j=a}^{b} φ(2^{-j}ξ) = χ(2^{-b-1}ξ) − χ(2^{-a}ξ)`, the partition of unity is
//! exact wherever the two end terms are 1 and 0.
//!
//! Transforms run on a zero-padded copy of the samples (default factor 16) so the
//! low-frequency blocks of decaying data are resolved. Functions that do not decay
//! at the right end are transformed through their derivative, dividing by the
//! symbol of the 4th-order difference stencil; every block avoids `ξ = 0`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{self, DecayClass, Grid, LineFunction};

/// Inner edge of the transition of `χ` (and of the annulus of `φ`).
pub const CHI_INNER: f64 = 0.75;
/// Outer edge of the transition of `χ`.
pub const CHI_OUTER: f64 = 0.76;
/// Outer radius of the annulus guaranteed to contain the support of `φ`.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;
/// Default zero-padding factor of the transform grid.
pub const DEFAULT_PADDING: usize = 16;

const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// `C^∞` step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Low-frequency profile `χ(ξ)`.
pub fn chi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Annular profile `φ(ξ) = χ(ξ/2) − χ(ξ)`.
pub fn phi(xi: f64) -> f64 {
    chi(0.5 * xi) - chi(xi)
}

fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

/// Homogeneous (all dyadic blocks) or inhomogeneous (low part plus `j ≥ 0`) norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Homogeneity {
    Homogeneous,
    Inhomogeneous,
}

/// Parameters `(s, p, r)` of a Besov norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneity: Homogeneity,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64, homogeneity: Homogeneity) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(r)?;
        if !s.is_finite() {
            return Err(Error::InvalidParams(format!(
                "regularity must be finite, got {s}"
            )));
        }
        Ok(Self {
            s,
            p,
            r,
            homogeneity,
        })
    }

    pub fn homogeneous(s: f64, p: f64, r: f64) -> Result<Self> {
        Self::new(s, p, r, Homogeneity::Homogeneous)
    }

    pub fn inhomogeneous(s: f64, p: f64, r: f64) -> Result<Self> {
        Self::new(s, p, r, Homogeneity::Inhomogeneous)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(p))
    } else {
        Ok(())
    }
}

/// Parameters of the mixed space `L^∞ ∩ Ḃ^{s-1}_{p,r} ∩ Ḃ^{s-2}_{p,r} ∩ Ẇ^{1,q}`.
///
/// At `s = 2` the Besov pair is `(1, 2)` and `r` must be `p` for `p ≤ 2`, `2` for `p ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ESpaceParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub q: f64,
}

impl ESpaceParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(r)?;
        if !(s >= 2.0) || !s.is_finite() {
            return Err(Error::InvalidParams(format!(
                "E-space regularity must be >= 2, got {s}"
            )));
        }
        if s == 2.0 {
            let forced = if p <= 2.0 { p } else { 2.0 };
            if r != forced {
                return Err(Error::InvalidParams(format!(
                    "at s = 2 with p = {p} the sum exponent must be r = {forced}, got {r}"
                )));
            }
        }
        let q = if p == 1.0 {
            f64::INFINITY
        } else if p.is_infinite() {
            1.0
        } else {
            p / (p - 1.0)
        };
        Ok(Self { s, p, r, q })
    }

    /// Regularities of the two homogeneous Besov components.
    pub fn besov_pair(&self) -> (f64, f64) {
        if self.s == 2.0 {
            (1.0, 2.0)
        } else {
            (self.s - 1.0, self.s - 2.0)
        }
    }
}

/// Multiplier weights on the positive-frequency bins `start..start + weights.len()`.
#[derive(Debug, Clone)]
struct Band {
    start: usize,
    weights: Vec<f64>,
}

/// The `χ/φ` family on the zero-padded frequency grid of a [`Grid`], for blocks `j_min..=j_max`.
#[derive(Clone)]
pub struct DyadicFilterBank {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    padded_len: usize,
    dxi: f64,
    bands: Vec<Band>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DyadicFilterBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DyadicFilterBank")
            .field("grid", &self.grid)
            .field("j_min", &self.j_min)
            .field("j_max", &self.j_max)
            .field("padded_len", &self.padded_len)
            .finish()
    }
}

/// Builds the bank with the default zero-padding factor.
pub fn build_filter_bank(grid: Grid, j_min: i32, j_max: i32) -> Result<DyadicFilterBank> {
    build_filter_bank_padded(grid, j_min, j_max, DEFAULT_PADDING)
}

/// Builds the bank on a transform grid of `padding * n` points.
pub fn build_filter_bank_padded(
    grid: Grid,
    j_min: i32,
    j_max: i32,
    padding: usize,
) -> Result<DyadicFilterBank> {
    if j_min > j_max {
        return Err(Error::InvalidParams(format!(
            "empty block range [{j_min}, {j_max}]"
        )));
    }
    if padding == 0 || !padding.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "padding factor {padding} must be a power of two"
        )));
    }
    let h = grid.spacing();
    let nyquist = std::f64::consts::PI / h;
    let band_edge = pow2(j_max) * ANNULUS_OUTER;
    if band_edge > nyquist {
        return Err(Error::Nyquist {
            j_max,
            band_edge,
            nyquist,
        });
    }
    let padded_len = padding * grid.len();
    let dxi = 2.0 * std::f64::consts::PI / (padded_len as f64 * h);
    let low_edge = pow2(j_min) * CHI_INNER;
    if low_edge < dxi {
        return Err(Error::DomainSize {
            j_min,
            band_edge: low_edge,
            resolution: dxi,
        });
    }
    let half = padded_len / 2;
    let bands = (j_min..=j_max)
        .map(|j| {
            let scale = pow2(j);
            let start = ((CHI_INNER * scale / dxi).floor() as usize).max(1);
            let stop = ((2.0 * CHI_OUTER * scale / dxi).ceil() as usize).min(half - 1);
            let weights = (start..=stop)
                .map(|k| phi(k as f64 * dxi / scale))
                .collect();
            Band { start, weights }
        })
        .collect();
    let mut planner = FftPlanner::new();
    Ok(DyadicFilterBank {
        grid,
        j_min,
        j_max,
        padded_len,
        dxi,
        bands,
        forward: planner.plan_fft_forward(padded_len),
        inverse: planner.plan_fft_inverse(padded_len),
    })
}

/// Widest admissible block range `(j_min, j_max)` on `grid` with the default padding.
pub fn widest_block_range(grid: &Grid) -> (i32, i32) {
    let h = grid.spacing();
    let j_max = (std::f64::consts::PI / h / ANNULUS_OUTER).log2().floor() as i32;
    let dxi = 2.0 * std::f64::consts::PI / ((DEFAULT_PADDING * grid.len()) as f64 * h);
    let j_min = (dxi / CHI_INNER).log2().ceil() as i32;
    (j_min.min(j_max), j_max)
}

/// Builds the bank over the widest admissible block range.
pub fn build_widest_filter_bank(grid: Grid) -> Result<DyadicFilterBank> {
    let (j_min, j_max) = widest_block_range(&grid);
    build_filter_bank(grid, j_min, j_max)
}

/// Diagnostics of the three bank invariants on the sampled frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BankInvariants {
    /// Largest `φ` value sampled outside the annulus `[3/4, 8/3]`.
    pub support_leak: f64,
    /// Extremes of `Σ_j φ²(2^{-j}ξ)` over the resolvable band.
    pub square_sum_min: f64,
    pub square_sum_max: f64,
    /// Largest `|Σ_j φ(2^{-j}ξ) − 1|` over the resolvable band.
    pub partition_error: f64,
    /// Largest `|χ(ξ) + Σ_{j≥0} φ(2^{-j}ξ) − 1|` over `|ξ| ≤ 2^{j_max}·3/2`.
    pub inhomogeneous_partition_error: f64,
}

impl DyadicFilterBank {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    /// Spacing of the padded frequency grid.
    pub fn frequency_step(&self) -> f64 {
        self.dxi
    }

    /// Angular frequency of transform bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        let m = self.padded_len;
        if k <= m / 2 {
            k as f64 * self.dxi
        } else {
            -((m - k) as f64) * self.dxi
        }
    }

    /// Frequencies of all transform bins in FFT order.
    pub fn frequency_grid(&self) -> Vec<f64> {
        (0..self.padded_len).map(|k| self.frequency(k)).collect()
    }

    /// The band `[2^{j_min}·4/3, 2^{j_max}·3/2]` on which the block sum equals 1 exactly.
    pub fn resolvable_band(&self) -> (f64, f64) {
        (pow2(self.j_min) * 4.0 / 3.0, pow2(self.j_max) * 1.5)
    }

    /// Stored multiplier `φ(2^{-j}ξ_k)` at transform bin `k`.
    pub fn phi_weight(&self, j: i32, k: usize) -> f64 {
        if j < self.j_min || j > self.j_max {
            return 0.0;
        }
        let band = &self.bands[(j - self.j_min) as usize];
        let m = self.padded_len;
        let kk = if k <= m / 2 { k } else { m - k };
        if kk < band.start {
            return 0.0;
        }
        band.weights.get(kk - band.start).copied().unwrap_or(0.0)
    }

    /// Evaluates the bank invariants on the transform frequency grid.
    pub fn invariants(&self) -> BankInvariants {
        let mut support_leak = 0.0_f64;
        let steps = 20_000;
        for i in 0..=steps {
            let xi = 4.0 * i as f64 / steps as f64;
            if !(CHI_INNER..=ANNULUS_OUTER).contains(&xi) {
                support_leak = support_leak.max(phi(xi).abs());
            }
        }
        let (lo, hi) = self.resolvable_band();
        let mut square_sum_min = f64::INFINITY;
        let mut square_sum_max = f64::NEG_INFINITY;
        let mut partition_error = 0.0_f64;
        let mut inhomogeneous_partition_error = 0.0_f64;
        for k in 1..=self.padded_len / 2 {
            let xi = k as f64 * self.dxi;
            if xi > hi {
                break;
            }
            let (mut sum, mut sq) = (0.0, 0.0);
            for j in self.j_min..=self.j_max {
                let w = self.phi_weight(j, k);
                sum += w;
                sq += w * w;
            }
            if xi >= lo {
                square_sum_min = square_sum_min.min(sq);
                square_sum_max = square_sum_max.max(sq);
                partition_error = partition_error.max((sum - 1.0).abs());
            }
            let inhom: f64 = chi(xi) + (0..=self.j_max).map(|j| phi(xi / pow2(j))).sum::<f64>();
            inhomogeneous_partition_error = inhomogeneous_partition_error.max((inhom - 1.0).abs());
        }
        BankInvariants {
            support_leak,
            square_sum_min,
            square_sum_max,
            partition_error,
            inhomogeneous_partition_error,
        }
    }

    fn check_grid(&self, f: &LineFunction) -> Result<()> {
        if *f.grid() != self.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    fn check_block(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            Err(Error::BlockOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            })
        } else {
            Ok(())
        }
    }

    /// Discrete spectrum of `f` on the padded grid.
    ///
    /// Non-decaying data go through the derivative; their zero bin is set to 0.
    fn spectrum(&self, f: &LineFunction) -> Result<Vec<Complex<f64>>> {
        self.check_grid(f)?;
        let n = self.grid.len();
        let m = self.padded_len;
        let h = self.grid.spacing();
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        match f.decay_class() {
            DecayClass::BoundedNondecaying => {
                let mut d = vec![0.0; n];
                grid::derivative_into(f.values(), h, &mut d);
                let bound = grid::DECAY_TOLERANCE * grid::sup_abs(&d).max(f64::MIN_POSITIVE);
                if d[0].abs() > bound || d[n - 1].abs() > bound {
                    return Err(Error::Truncation(
                        "non-decaying function must have a decaying derivative for spectral blocks"
                            .into(),
                    ));
                }
                for (b, v) in buf.iter_mut().zip(&d) {
                    b.re = *v;
                }
                self.forward.process(&mut buf);
                buf[0] = Complex::new(0.0, 0.0);
                for (k, b) in buf.iter_mut().enumerate().skip(1) {
                    let theta = self.frequency(k) * h;
                    let sigma = (8.0 * theta.sin() - (2.0 * theta).sin()) / (6.0 * h);
                    if sigma.abs() < 1e-12 / h {
                        *b = Complex::new(0.0, 0.0);
                    } else {
                        // divide by i*sigma
                        *b = Complex::new(b.im / sigma, -b.re / sigma);
                    }
                }
            }
            _ => {
                for (b, v) in buf.iter_mut().zip(f.values()) {
                    b.re = *v;
                }
                self.forward.process(&mut buf);
            }
        }
        Ok(buf)
    }

    /// Applies a radial multiplier `w(|ξ|)` and returns the real samples on the padded grid.
    fn filtered_padded(
        &self,
        spectrum: &[Complex<f64>],
        weight: impl Fn(usize) -> f64,
    ) -> Result<Vec<f64>> {
        let m = self.padded_len;
        let mut buf: Vec<Complex<f64>> = spectrum
            .iter()
            .enumerate()
            .map(|(k, c)| c * weight(k))
            .collect();
        self.inverse.process(&mut buf);
        let inv = 1.0 / m as f64;
        let mut residue = 0.0_f64;
        let mut scale = 0.0_f64;
        let out: Vec<f64> = buf
            .iter()
            .map(|c| {
                residue = residue.max((c.im * inv).abs());
                scale = scale.max((c.re * inv).abs());
                c.re * inv
            })
            .collect();
        if residue > IMAGINARY_TOLERANCE * scale.max(1.0) {
            return Err(Error::ImaginaryResidue(residue));
        }
        grid::check_finite(&out, "filtered function")?;
        Ok(out)
    }

    fn band_weight(&self, j: i32) -> impl Fn(usize) -> f64 + Sync + '_ {
        move |k| self.phi_weight(j, k)
    }

    fn radial_weight<'a>(
        &'a self,
        profile: impl Fn(f64) -> f64 + Sync + 'a,
    ) -> impl Fn(usize) -> f64 + Sync + 'a {
        move |k| profile(self.frequency(k).abs())
    }

    fn restrict(&self, padded: Vec<f64>) -> Result<LineFunction> {
        let mut values = padded;
        values.truncate(self.grid.len());
        LineFunction::classified(self.grid, values)
    }

    fn low_cut(&self) -> impl Fn(f64) -> f64 + Sync {
        let scale = pow2(-self.j_min);
        move |xi| chi(xi * scale)
    }

    fn high_cut(&self) -> impl Fn(f64) -> f64 + Sync {
        let scale = pow2(-self.j_max - 1);
        move |xi| 1.0 - chi(xi * scale)
    }
}

/// `Δ_j f`: the block of `f` at scale `2^j`, restricted to the grid of `f`.
pub fn dyadic_block(bank: &DyadicFilterBank, f: &LineFunction, j: i32) -> Result<LineFunction> {
    bank.check_block(j)?;
    let spec = bank.spectrum(f)?;
    let padded = bank.filtered_padded(&spec, bank.band_weight(j))?;
    bank.restrict(padded)
}

/// Everything above the top block: multiplier `1 − χ(2^{-j_max-1}ξ)`.
pub fn high_residual(bank: &DyadicFilterBank, f: &LineFunction) -> Result<LineFunction> {
    let spec = bank.spectrum(f)?;
    let padded = bank.filtered_padded(&spec, bank.radial_weight(bank.high_cut()))?;
    bank.restrict(padded)
}

/// Everything below the bottom block: multiplier `χ(2^{-j_min}ξ)`.
///
/// For non-decaying data this is `f` minus the blocks and the high residual.
pub fn low_residual(bank: &DyadicFilterBank, f: &LineFunction) -> Result<LineFunction> {
    if f.decay_class().decays() {
        let spec = bank.spectrum(f)?;
        let padded = bank.filtered_padded(&spec, bank.radial_weight(bank.low_cut()))?;
        return bank.restrict(padded);
    }
    let mut rest = f.values().to_vec();
    for j in bank.j_min..=bank.j_max {
        subtract(&mut rest, dyadic_block(bank, f, j)?.values());
    }
    subtract(&mut rest, high_residual(bank, f)?.values());
    LineFunction::classified(bank.grid, rest)
}

/// Inhomogeneous low-frequency part `S_0 f` with multiplier `χ(ξ)`.
pub fn inhomogeneous_low(bank: &DyadicFilterBank, f: &LineFunction) -> Result<LineFunction> {
    if bank.j_min > 0 || bank.j_max < 0 {
        return Err(Error::InvalidParams(format!(
            "inhomogeneous decomposition needs j_min <= 0 <= j_max, bank has [{}, {}]",
            bank.j_min, bank.j_max
        )));
    }
    if f.decay_class().decays() {
        let spec = bank.spectrum(f)?;
        let padded = bank.filtered_padded(&spec, bank.radial_weight(chi))?;
        return bank.restrict(padded);
    }
    let mut rest = f.values().to_vec();
    for j in 0..=bank.j_max {
        subtract(&mut rest, dyadic_block(bank, f, j)?.values());
    }
    subtract(&mut rest, high_residual(bank, f)?.values());
    LineFunction::classified(bank.grid, rest)
}

fn subtract(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a -= b;
    }
}

/// `L^p` norms of the dyadic blocks of one function, reusable for many `(s, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockNorms {
    pub p: f64,
    pub homogeneity: Homogeneity,
    /// Norm of the low part (`S_0 f`), present in the inhomogeneous case.
    pub low: Option<f64>,
    /// `(j, ‖Δ_j f‖_{L^p})` for the blocks entering the norm.
    pub blocks: Vec<(i32, f64)>,
    /// `L^p` norm of the part above the top block (dropped from the norm).
    pub high_tail: f64,
}

impl BlockNorms {
    /// `ℓ^r` aggregation of `2^{js}‖Δ_j f‖_{L^p}` (plus the low part when inhomogeneous).
    pub fn aggregate(&self, s: f64, r: f64) -> Result<f64> {
        check_exponent(r)?;
        let mut terms: Vec<f64> = self
            .blocks
            .iter()
            .map(|&(j, v)| 2f64.powf(j as f64 * s) * v)
            .collect();
        if let Some(low) = self.low {
            terms.push(low);
        }
        Ok(lr_sum(&terms, r))
    }
}

/// `ℓ^r` norm scaled by the largest term, so that `r = 1, 2, ∞` are ordered exactly.
fn lr_sum(terms: &[f64], r: f64) -> f64 {
    let max = terms.iter().fold(0.0_f64, |m, &t| m.max(t.abs()));
    if max == 0.0 || r.is_infinite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|t| (t.abs() / max).powf(r)).sum();
    max * sum.powf(1.0 / r)
}

/// Computes the block norms of `f` for exponent `p`.
///
/// Norms are taken on the padded transform domain; for `p = 2` through Parseval.
/// The inhomogeneous low part of non-decaying data is measured on the grid of `f`.
pub fn block_norms(
    bank: &DyadicFilterBank,
    f: &LineFunction,
    p: f64,
    homogeneity: Homogeneity,
) -> Result<BlockNorms> {
    check_exponent(p)?;
    let h = bank.grid.spacing();
    let spec = bank.spectrum(f)?;
    let js: Vec<i32> = match homogeneity {
        Homogeneity::Homogeneous => (bank.j_min..=bank.j_max).collect(),
        Homogeneity::Inhomogeneous => {
            if bank.j_min > 0 || bank.j_max < 0 {
                return Err(Error::InvalidParams(format!(
                    "inhomogeneous norm needs j_min <= 0 <= j_max, bank has [{}, {}]",
                    bank.j_min, bank.j_max
                )));
            }
            (0..=bank.j_max).collect()
        }
    };
    let norm_of = |weight: &(dyn Fn(usize) -> f64 + Sync)| -> Result<f64> {
        if p == 2.0 {
            let m = bank.padded_len as f64;
            let energy: f64 = spec
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let w = weight(k);
                    if w == 0.0 {
                        0.0
                    } else {
                        w * w * c.norm_sqr()
                    }
                })
                .sum();
            Ok((h * energy / m).sqrt())
        } else {
            let v = bank.filtered_padded(&spec, weight)?;
            grid::lp_norm_of(&v, h, p)
        }
    };
    let blocks = js
        .par_iter()
        .map(|&j| norm_of(&bank.band_weight(j)).map(|v| (j, v)))
        .collect::<Result<Vec<_>>>()?;
    let high_tail = norm_of(&bank.radial_weight(bank.high_cut()))?;
    let low = match homogeneity {
        Homogeneity::Homogeneous => None,
        Homogeneity::Inhomogeneous if f.decay_class().decays() => {
            Some(norm_of(&bank.radial_weight(chi))?)
        }
        Homogeneity::Inhomogeneous => Some(grid::lp_norm(&inhomogeneous_low(bank, f)?, p)?),
    };
    Ok(BlockNorms {
        p,
        homogeneity,
        low,
        blocks,
        high_tail,
    })
}

/// `‖f‖_{B^s_{p,r}}` (or the homogeneous version) over the blocks of the bank.
pub fn besov_norm(bank: &DyadicFilterBank, f: &LineFunction, params: BesovParams) -> Result<f64> {
    block_norms(bank, f, params.p, params.homogeneity)?.aggregate(params.s, params.r)
}

/// Components of a mixed-space norm, summed in [`ENorm::total`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ENorm {
    pub sup: f64,
    pub besov_first: f64,
    pub besov_second: f64,
    pub derivative_lq: f64,
}

impl ENorm {
    pub fn total(&self) -> f64 {
        self.sup + self.besov_first + self.besov_second + self.derivative_lq
    }
}

/// Component-wise mixed-space norm.
pub fn e_space_components(
    bank: &DyadicFilterBank,
    f: &LineFunction,
    params: ESpaceParams,
) -> Result<ENorm> {
    let (s1, s2) = params.besov_pair();
    let blocks = block_norms(bank, f, params.p, Homogeneity::Homogeneous)?;
    let df = grid::derivative(f)?;
    Ok(ENorm {
        sup: f.sup(),
        besov_first: blocks.aggregate(s1, params.r)?,
        besov_second: blocks.aggregate(s2, params.r)?,
        derivative_lq: grid::lp_norm(&df, params.q)?,
    })
}

/// `‖f‖_∞ + ‖f‖_{Ḃ^{s_1}_{p,r}} + ‖f‖_{Ḃ^{s_2}_{p,r}} + ‖f'‖_{L^q}`.
pub fn e_space_norm(
    bank: &DyadicFilterBank,
    f: &LineFunction,
    params: ESpaceParams,
) -> Result<f64> {
    Ok(e_space_components(bank, f, params)?.total())
}

fn serialize_exponent<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Serializable record of one computed norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub s: f64,
    #[serde(serialize_with = "serialize_exponent")]
    pub p: f64,
    #[serde(serialize_with = "serialize_exponent")]
    pub r: f64,
    pub homogeneity: Homogeneity,
    pub value: f64,
}

impl NormReport {
    pub fn compute(bank: &DyadicFilterBank, f: &LineFunction, params: BesovParams) -> Result<Self> {
        Ok(Self {
            s: params.s,
            p: params.p,
            r: params.r,
            homogeneity: params.homogeneity,
            value: besov_norm(bank, f, params)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;

    fn standard_bank() -> DyadicFilterBank {
        build_filter_bank(Grid::new(12.0, 4096).unwrap(), -5, 7).unwrap()
    }

    #[test]
    fn test_profiles() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(0.76), 0.0);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(phi(1.6), 0.0);
        assert!(phi(0.755) > 0.0 && phi(0.755) < 1.0);
    }

    #[test]
    fn test_bank_example_grid() {
        let g = Grid::new(12.0, 4096).unwrap();
        let bank = build_filter_bank(g, -3, 7).unwrap();
        let inv = bank.invariants();
        assert!(inv.support_leak <= 1e-12);
        assert!(inv.square_sum_min >= 0.5 && inv.square_sum_max <= 1.0);
        assert!(inv.partition_error <= 1e-10);
        assert!(inv.inhomogeneous_partition_error <= 1e-10);
    }

    #[test]
    fn test_bank_rejections() {
        let small = Grid::new(12.0, 256).unwrap();
        assert!(matches!(
            build_filter_bank(small, -3, 4),
            Err(Error::Nyquist { .. })
        ));
        assert!(build_filter_bank(small, -3, 3).is_ok());
        let g = Grid::new(12.0, 4096).unwrap();
        assert!(matches!(
            build_filter_bank(g, -3, 8),
            Err(Error::Nyquist { .. })
        ));
        assert!(matches!(
            build_filter_bank(g, -6, 7),
            Err(Error::DomainSize { .. })
        ));
    }

    #[test]
    fn test_block_out_of_range() {
        let bank = standard_bank();
        let f = LineFunction::zeros(*bank.grid());
        assert!(matches!(
            dyadic_block(&bank, &f, 8),
            Err(Error::BlockOutOfRange { .. })
        ));
        let b = dyadic_block(&bank, &f, 0).unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn test_gaussian_besov_examples() {
        let bank = standard_bank();
        let g = *bank.grid();
        let f = LineFunction::from_fn(g, DecayClass::GaussianDecay, |x| (-x * x).exp()).unwrap();
        let b0 = besov_norm(&bank, &f, BesovParams::homogeneous(0.0, 2.0, 2.0).unwrap()).unwrap();
        let l2 = lp_norm(&f, 2.0).unwrap();
        assert!((b0 / l2 - 1.0).abs() < 0.02, "ratio {}", b0 / l2);
        let b1 = besov_norm(&bank, &f, BesovParams::homogeneous(1.0, 2.0, 2.0).unwrap()).unwrap();
        let d = lp_norm(&grid::derivative(&f).unwrap(), 2.0).unwrap();
        assert!((b1 / d - 1.0).abs() < 0.05, "ratio {}", b1 / d);
    }

    #[test]
    fn test_e_space_params_rule() {
        assert!(ESpaceParams::new(2.0, 2.0, 2.0).is_ok());
        assert!(ESpaceParams::new(2.0, 2.0, 1.0).is_err());
        assert!(ESpaceParams::new(2.0, 1.5, 1.5).is_ok());
        assert!(ESpaceParams::new(2.0, 3.0, 2.0).is_ok());
        assert!(ESpaceParams::new(1.5, 2.0, 2.0).is_err());
        let e = ESpaceParams::new(2.5, 2.0, 1.0).unwrap();
        assert_eq!(e.besov_pair(), (1.5, 0.5));
        assert_eq!(ESpaceParams::new(2.0, 1.0, 1.0).unwrap().q, f64::INFINITY);
    }

    #[test]
    fn test_norm_report_json() {
        let r = NormReport {
            s: 0.0,
            p: f64::INFINITY,
            r: 2.0,
            homogeneity: Homogeneity::Homogeneous,
            value: 1.5,
        };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["p"], "inf");
        assert_eq!(v["r"], 2.0);
        assert_eq!(v["homogeneity"], "homogeneous");
    }
}
