//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by grid construction, solvers, norms and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 16 points, got {0}")]
    GridTooSmall(usize),

    #[error("grid point count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("half-width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: String, index: usize },

    #[error("truncation invalid: {0}")]
    Truncation(String),

    #[error("exponent must lie in [1, inf], got {0}")]
    InvalidExponent(f64),

    #[error("input is not strictly increasing at index {index} ({left} >= {right})")]
    NonMonotone { index: usize, left: f64, right: f64 },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("Nyquist bound violated: 2^{j_max} * 8/3 = {band_edge} exceeds pi/h = {nyquist}")]
    Nyquist {
        j_max: i32,
        band_edge: f64,
        nyquist: f64,
    },

    #[error("domain-size bound violated: 2^{j_min} * 3/4 = {band_edge} is below the frequency resolution {resolution}")]
    DomainSize {
        j_min: i32,
        band_edge: f64,
        resolution: f64,
    },

    #[error("block index {j} outside [{j_min}, {j_max}]")]
    BlockOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("inverse transform left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("snapshot at t = {t} is past blow-up (min 1 + t/2 u0x = {margin:e})")]
    InvalidSnapshot { t: f64, margin: f64 },

    #[error("NaN produced by {term} in RK stage {stage} at t = {t}")]
    NanInStage {
        stage: usize,
        term: &'static str,
        t: f64,
    },

    #[error("scheme failure: {0}")]
    SchemeFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
