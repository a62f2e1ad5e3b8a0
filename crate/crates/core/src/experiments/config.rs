//! Structured-text configuration with `[grid]`, `[datum]` and `[scenario]` sections.
//!
//! Every key is optional; missing keys take per-command defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lagrangian::Forcing;
use crate::littlewood_paley::BesovParams;

use super::datum::Datum;
use super::illposed::IllposedDatumSpec;
use super::scenarios::UcWindow;

/// The CLI subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Crossval,
    Conserve,
    Global,
    Blowup,
    Picard,
    Besov,
    Illposed,
    Uc,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovSection {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub t_end: Option<f64>,
    pub forcing: Option<Forcing>,
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n_cut: Option<usize>,
    pub k_max: Option<usize>,
    pub horizon_fraction: Option<f64>,
    pub n_iter: Option<usize>,
    pub t_iter: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub besov: Option<BesovSection>,
    pub window: Option<UcWindow>,
    pub c_forcing: Option<f64>,
}

/// The file layout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub grid: GridSection,
    pub datum: Option<Datum>,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fills every missing key with the default for `command`.
    pub fn resolve(&self, command: Command) -> Result<Resolved> {
        let (l, n) = match command {
            Command::Blowup => (5.5, 65536),
            Command::Uc => (12.0, 1024),
            _ => (12.0, 4096),
        };
        let grid = Grid::new(self.grid.half_width.unwrap_or(l), self.grid.n.unwrap_or(n))?;
        let datum = self.datum.unwrap_or(match command {
            Command::Blowup => Datum::Blowup { amplitude: 1.0 },
            Command::Besov => Datum::Gaussian { amplitude: 1.0 },
            Command::Uc => Datum::Zero,
            _ => Datum::default(),
        });
        let t_end = self.scenario.t_end.unwrap_or(match command {
            Command::Conserve => 5.0,
            Command::Global => 10.0,
            _ => 1.0,
        });
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        let s = &self.scenario;
        let illposed = IllposedDatumSpec {
            epsilon: s.epsilon.unwrap_or(0.1),
            r: s.r.unwrap_or(2.0),
            p: s.p.unwrap_or(2.0),
            n_cut: s.n_cut.unwrap_or(8),
            k_max: s.k_max.unwrap_or(8),
        };
        let besov = s.besov.unwrap_or(BesovSection {
            s: 0.0,
            p: 2.0,
            r: 2.0,
        });
        let c_forcing = s.c_forcing.unwrap_or(0.5);
        Ok(Resolved {
            command,
            grid,
            datum,
            t_end,
            forcing: s.forcing.unwrap_or(match command {
                Command::Uc => Forcing::Closure(c_forcing),
                _ => Forcing::Zero,
            }),
            illposed,
            horizon_fraction: s.horizon_fraction.unwrap_or(0.99),
            n_iter: s.n_iter.unwrap_or(12),
            t_iter: s.t_iter.unwrap_or(0.1),
            seed: s.seed.unwrap_or(2024),
            samples: s.samples.unwrap_or(200),
            besov: BesovParams::homogeneous(besov.s, besov.p, besov.r)?,
            window: s.window.unwrap_or(UcWindow {
                a: -1.0,
                b: 1.0,
                t1: 0.5,
                t2: 1.0,
            }),
            c_forcing,
        })
    }
}

/// A configuration with every value decided.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: Command,
    pub grid: Grid,
    pub datum: Datum,
    pub t_end: f64,
    pub forcing: Forcing,
    pub illposed: IllposedDatumSpec,
    pub horizon_fraction: f64,
    pub n_iter: usize,
    pub t_iter: f64,
    pub seed: u64,
    pub samples: usize,
    pub besov: BesovParams,
    pub window: UcWindow,
    pub c_forcing: f64,
}
