//! Small data with a large negative slope at the origin, and the norm-inflation run.
//!
//! The datum is `ε S_N h / ‖S_N h‖_{Ḃ^{1+1/p}_{p,r}}` with
//! `h = Σ_k h_k / (2^{2k} k^{2/(1+r)})` and `ĥ_k(ξ) = i 2^{−k} ξ ψ(2^{−k} ξ)`, where
//! `ψ(η) = exp(−(|η| − 1.7)² / (2·0.3²))` is an annular profile inside the `k`-th block.
//! `S_N` keeps the terms `k < N`.

use std::f64::consts::PI;
use std::time::Instant;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DecayClass, Grid, LineFunction};
use crate::lagrangian::{self, Forcing};
use crate::littlewood_paley::{self, BesovParams, DyadicFilterBank};

use super::report::{ExperimentReport, Scenario, SeriesTable};

const PROFILE_CENTER: f64 = 1.7;
const PROFILE_WIDTH: f64 = 0.3;
/// Outer edge of a dyadic annulus relative to `2^k`.
const ANNULUS_OUTER: f64 = 8.0 / 3.0;
const IMAGINARY_TOLERANCE: f64 = 1e-10;
/// Required growth factor of `‖u_x‖_{B⁰_{∞,∞}}`.
pub const GROWTH_TARGET: f64 = 10.0;

/// Parameters of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IllposedDatumSpec {
    pub epsilon: f64,
    pub r: f64,
    pub p: f64,
    /// Low-frequency truncation: terms `k < n_cut` are kept.
    pub n_cut: usize,
    /// Series truncation.
    pub k_max: usize,
}

impl IllposedDatumSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.r > 1.0) {
            return Err(Error::InvalidParams(format!(
                "r must exceed 1, got {}",
                self.r
            )));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::InvalidExponent(self.p));
        }
        if self.k_max < self.n_cut {
            return Err(Error::InvalidParams(format!(
                "k_max = {} must be at least N = {}",
                self.k_max, self.n_cut
            )));
        }
        Ok(())
    }

    /// Index of the highest synthesized term.
    pub fn top_term(&self) -> usize {
        self.k_max.min(self.n_cut.saturating_sub(1))
    }

    /// The regularity `1 + 1/p` at which the datum is normalized.
    pub fn regularity(&self) -> f64 {
        1.0 + 1.0 / self.p
    }
}

/// The constructed datum with its spectrally exact slope.
#[derive(Debug, Clone, PartialEq)]
pub struct IllposedDatum {
    pub datum: LineFunction,
    pub slope: LineFunction,
    pub slope_at_zero: f64,
    pub spec: IllposedDatumSpec,
}

fn profile(eta: f64) -> f64 {
    (-(eta.abs() - PROFILE_CENTER).powi(2) / (2.0 * PROFILE_WIDTH * PROFILE_WIDTH)).exp()
}

/// Largest series index whose annulus lies below the Nyquist frequency of `grid`.
pub fn max_term(grid: &Grid) -> usize {
    let nyquist = PI / grid.spacing();
    (nyquist / ANNULUS_OUTER).log2().floor().max(0.0) as usize
}

/// Synthesizes the datum on the padded transform grid of `bank`.
pub fn build_illposed_datum(
    spec: IllposedDatumSpec,
    bank: &DyadicFilterBank,
    grid: Grid,
) -> Result<IllposedDatum> {
    spec.validate()?;
    if *bank.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let top = spec.top_term();
    let nyquist = PI / grid.spacing();
    if top >= 1 && 2f64.powi(top as i32) * ANNULUS_OUTER > nyquist {
        return Err(Error::Nyquist {
            j_max: top as i32,
            band_edge: 2f64.powi(top as i32) * ANNULUS_OUTER,
            nyquist,
        });
    }
    let m = bank.padded_len();
    let dxi = bank.frequency_step();
    let half_width = grid.half_width();
    let exponent = if spec.r.is_infinite() {
        0.0
    } else {
        2.0 / (1.0 + spec.r)
    };
    let weights: Vec<(f64, f64)> = (1..=top)
        .map(|k| {
            let scale = 2f64.powi(k as i32);
            (scale, 1.0 / (scale * scale * (k as f64).powf(exponent)))
        })
        .collect();
    let amplitude = |xi: f64| -> f64 {
        weights
            .iter()
            .map(|&(scale, w)| w * xi / scale * profile(xi / scale))
            .sum()
    };
    let mut slope_at_zero = 0.0;
    let mut values = Vec::with_capacity(m);
    let mut slopes = Vec::with_capacity(m);
    for k in 0..m {
        if k == m / 2 {
            values.push(Complex::new(0.0, 0.0));
            slopes.push(Complex::new(0.0, 0.0));
            continue;
        }
        let xi = bank.frequency(k);
        let a = amplitude(xi);
        slope_at_zero -= xi * a;
        let shift = Complex::from_polar(1.0, -xi * half_width);
        values.push(Complex::new(0.0, a) * shift);
        slopes.push(Complex::new(-xi * a, 0.0) * shift);
    }
    let norm = dxi / (2.0 * PI);
    let inverse = FftPlanner::new().plan_fft_inverse(m);
    let synthesize = |mut spectrum: Vec<Complex<f64>>| -> Result<LineFunction> {
        inverse.process(&mut spectrum);
        let window = &spectrum[..grid.len()];
        let peak = window.iter().fold(0.0_f64, |a, c| a.max(c.re.abs()));
        let residue = window.iter().fold(0.0_f64, |a, c| a.max(c.im.abs()));
        if peak > 0.0 && residue > IMAGINARY_TOLERANCE * peak {
            return Err(Error::ImaginaryResidue(residue / peak));
        }
        LineFunction::new(
            grid,
            window.iter().map(|c| c.re * norm).collect(),
            DecayClass::GaussianDecay,
        )
    };
    let raw = synthesize(values)?;
    let raw_slope = synthesize(slopes)?;
    let params = BesovParams::homogeneous(spec.regularity(), spec.p, spec.r)?;
    let besov = littlewood_paley::besov_norm(bank, &raw, params)?;
    let factor = if besov == 0.0 {
        1.0
    } else {
        spec.epsilon / besov
    };
    Ok(IllposedDatum {
        datum: raw.scaled(factor)?,
        slope: raw_slope.scaled(factor)?,
        slope_at_zero: slope_at_zero * norm * factor,
        spec,
    })
}

/// Result of searching the truncation index.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSearch {
    pub datum: IllposedDatum,
    /// `u0'(0) ≤ −2/ε` holds for the returned datum.
    pub satisfied: bool,
    /// Slopes at zero for every tried `N`, starting at `N = 2`.
    pub slopes: Vec<(usize, f64)>,
}

/// Increases `N` from 2 until `u0'(0) ≤ −2/ε`, up to the largest resolvable term.
pub fn search_cut(
    spec: IllposedDatumSpec,
    bank: &DyadicFilterBank,
    grid: Grid,
) -> Result<CutSearch> {
    spec.validate()?;
    let limit = max_term(&grid) + 1;
    let target = -2.0 / spec.epsilon;
    let mut slopes = Vec::new();
    let mut last = None;
    for n_cut in 2..=limit {
        let trial = IllposedDatumSpec {
            n_cut,
            k_max: spec.k_max.max(n_cut),
            ..spec
        };
        let datum = build_illposed_datum(trial, bank, grid)?;
        slopes.push((n_cut, datum.slope_at_zero));
        if datum.slope_at_zero <= target {
            return Ok(CutSearch {
                datum,
                satisfied: true,
                slopes,
            });
        }
        last = Some(datum);
    }
    let datum = last.ok_or_else(|| Error::InvalidParams("grid resolves no series term".into()))?;
    Ok(CutSearch {
        datum,
        satisfied: false,
        slopes,
    })
}

/// `‖f‖_∞ + ‖f‖_{Ḃ^{1/p}_{p,r}} + ‖f‖_{Ḃ^{1+1/p}_{p,r}}`.
pub fn a_norm(bank: &DyadicFilterBank, f: &LineFunction, p: f64, r: f64) -> Result<f64> {
    let blocks =
        littlewood_paley::block_norms(bank, f, p, littlewood_paley::Homogeneity::Homogeneous)?;
    Ok(f.sup() + blocks.aggregate(1.0 / p, r)? + blocks.aggregate(1.0 + 1.0 / p, r)?)
}

/// Builds the datum (searching `N`) and tracks `‖u_x‖_{B⁰_{∞,∞}}` towards `fraction·T*`.
pub fn run_norm_inflation(
    spec: IllposedDatumSpec,
    horizon_fraction: f64,
    grid: Grid,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    if !(horizon_fraction > 0.0 && horizon_fraction < 1.0) {
        return Err(Error::InvalidParams(format!(
            "horizon fraction must lie in (0, 1), got {horizon_fraction}"
        )));
    }
    let bank = littlewood_paley::build_widest_filter_bank(grid)?;
    let search = search_cut(spec, &bank, grid)?;
    let mut report = ExperimentReport::new(
        Scenario::Illposed,
        serde_json::json!({
            "spec": spec,
            "horizon_fraction": horizon_fraction,
            "grid": {"L": grid.half_width(), "n": grid.len()},
        }),
    );
    report.table(
        "cut_search",
        SeriesTable::default()
            .with("n_cut", search.slopes.iter().map(|s| s.0 as f64).collect())
            .with("slope_at_zero", search.slopes.iter().map(|s| s.1).collect()),
    );
    report.estimate("n_cut", search.datum.spec.n_cut as f64);
    inflation_checks(
        report,
        &bank,
        &search.datum.datum,
        Some(&search.datum.slope),
        search.datum.slope_at_zero,
        spec,
        horizon_fraction,
        started,
    )
}

/// Norm-inflation checks for an arbitrary datum; no negative slope makes the run inapplicable.
pub fn run_norm_inflation_for(
    u0: &LineFunction,
    spec: IllposedDatumSpec,
    horizon_fraction: f64,
) -> Result<ExperimentReport> {
    let started = Instant::now();
    let bank = littlewood_paley::build_widest_filter_bank(*u0.grid())?;
    let slope = u0.grid().len() / 2;
    let d = crate::grid::derivative(u0)?;
    let slope_at_zero = 0.5 * (d.values()[slope - 1] + d.values()[slope]);
    let report = ExperimentReport::new(Scenario::Illposed, serde_json::json!({"spec": spec}));
    inflation_checks(
        report,
        &bank,
        u0,
        None,
        slope_at_zero,
        spec,
        horizon_fraction,
        started,
    )
}

#[allow(clippy::too_many_arguments)]
fn inflation_checks(
    mut report: ExperimentReport,
    bank: &DyadicFilterBank,
    u0: &LineFunction,
    slope: Option<&LineFunction>,
    slope_at_zero: f64,
    spec: IllposedDatumSpec,
    horizon_fraction: f64,
    started: Instant,
) -> Result<ExperimentReport> {
    let state = match slope {
        Some(s) => lagrangian::init_state_with_slope(u0, s, Forcing::Zero)?,
        None => lagrangian::init_state(u0, Forcing::Zero)?,
    };
    let (_, grid_min) = state.min_slope();
    let min_slope = grid_min.min(slope_at_zero);
    let t_star = if min_slope < 0.0 && lagrangian::blowup_time(&state).is_finite() {
        -2.0 / min_slope
    } else {
        f64::INFINITY
    };
    report.estimate("slope_at_zero", slope_at_zero);
    report.estimate("t_star", t_star);
    if !t_star.is_finite() {
        return Ok(report
            .inapplicable(
                "illposed.negative_slope",
                "datum has no negative slope, T* is infinite",
            )
            .conclude(started));
    }
    let a = a_norm(bank, u0, spec.p, spec.r)?;
    report.estimate("a_norm", a);

    let t_last = horizon_fraction * t_star;
    let mut times: Vec<f64> = (0..12).map(|k| t_last * (1.0 - 0.5f64.powi(k))).collect();
    times.push(t_last);
    let b0 = BesovParams::homogeneous(0.0, f64::INFINITY, f64::INFINITY)?;
    let mut besov = Vec::with_capacity(times.len());
    let mut sup = Vec::with_capacity(times.len());
    let mut reached = 0.0;
    for &t in &times {
        let snap = lagrangian::snapshot(&state, t)?;
        let fields = match lagrangian::to_eulerian(&snap, u0.grid()) {
            Ok(f) => f,
            Err(Error::NonMonotone { .. } | Error::InvalidSnapshot { .. }) => break,
            Err(e) => return Err(e),
        };
        besov.push(littlewood_paley::besov_norm(bank, &fields.ux, b0)?);
        sup.push(fields.ux.sup());
        reached = t;
    }
    times.truncate(besov.len());
    report.estimate("resolved_until", reached);
    let growth = match (besov.first(), besov.last()) {
        (Some(&first), Some(&last)) if first > 0.0 => last / first,
        _ => 0.0,
    };
    report.estimate("growth", growth);
    report.table(
        "inflation",
        SeriesTable::default()
            .with("t", times)
            .with("ux_besov_0_inf_inf", besov)
            .with("ux_sup", sup),
    );
    report.check_le("illposed.a_norm", a, spec.epsilon);
    report.check_le("illposed.slope", slope_at_zero, -2.0 / spec.epsilon);
    report.check_le("illposed.t_star", t_star, spec.epsilon);
    report.check_ge("illposed.resolved_horizon", reached, t_last);
    report.check_ge("illposed.growth", growth, GROWTH_TARGET);
    Ok(report.conclude(started))
}
