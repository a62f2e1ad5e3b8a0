//! Command-line front end: `hs-lab <subcommand> [--config FILE] [overrides]`.
//!
//! Exit codes: 0 pass, 2 fail, 3 inapplicable, 1 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::experiments::config::{Command, Config, Resolved};
use crate::experiments::{illposed, scenarios, ExperimentReport};
use crate::littlewood_paley::NormReport;

#[derive(Debug, Parser)]
#[command(
    name = "hs-lab",
    version,
    about = "Hunter–Saxton numerical lab",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run both solvers from one datum to t_end.
    Solve(Common),
    /// Eulerian versus Lagrangian agreement at n and 2n.
    Crossval(Common),
    /// Conservation of ‖u_x‖_{L²} along both solvers.
    Conserve(Common),
    /// Global-existence monitor.
    Global(Common),
    /// Blow-up time, Riccati trace and Eulerian halt.
    Blowup(Common),
    /// Picard iteration ledger.
    Picard(Common),
    /// Littlewood–Paley soundness and the Besov norm of the datum.
    Besov(Common),
    /// Norm inflation from small data.
    Illposed(Common),
    /// Unique-continuation probe.
    Uc(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file with [grid], [datum] and [scenario] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Half-width of the truncated line.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Number of grid points (power of two).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json and series/*.csv.
    #[arg(long, default_value = "hs-out")]
    out: PathBuf,
    /// Also write a binary state dump of Eulerian trajectories.
    #[arg(long)]
    dump: bool,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Solve(c) => (Command::Solve, c),
            Sub::Crossval(c) => (Command::Crossval, c),
            Sub::Conserve(c) => (Command::Conserve, c),
            Sub::Global(c) => (Command::Global, c),
            Sub::Blowup(c) => (Command::Blowup, c),
            Sub::Picard(c) => (Command::Picard, c),
            Sub::Besov(c) => (Command::Besov, c),
            Sub::Illposed(c) => (Command::Illposed, c),
            Sub::Uc(c) => (Command::Uc, c),
        }
    }
}

fn resolve(command: Command, common: &Common) -> Result<Resolved> {
    let mut config = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if common.half_width.is_some() {
        config.grid.half_width = common.half_width;
    }
    if common.n.is_some() {
        config.grid.n = common.n;
    }
    if common.t_end.is_some() {
        config.scenario.t_end = common.t_end;
    }
    if common.epsilon.is_some() {
        config.scenario.epsilon = common.epsilon;
    }
    if common.seed.is_some() {
        config.scenario.seed = common.seed;
    }
    config.resolve(command)
}

fn run(cfg: &Resolved, out: &Path, dump: bool) -> Result<ExperimentReport> {
    std::fs::create_dir_all(out)?;
    let report = match cfg.command {
        Command::Solve => {
            let solved = scenarios::run_solve(&cfg.datum, cfg.grid, cfg.t_end, cfg.forcing)?;
            solved
                .snapshot
                .write_csv(BufWriter::new(File::create(out.join("snapshot.csv"))?))?;
            solved
                .trajectory
                .write_csv(BufWriter::new(File::create(out.join("trajectory.csv"))?))?;
            if dump {
                solved
                    .trajectory
                    .write_dump(BufWriter::new(File::create(out.join("states.bin"))?))?;
            }
            solved.report
        }
        Command::Crossval => scenarios::run_crossval(&cfg.datum, cfg.grid, cfg.t_end)?,
        Command::Conserve => scenarios::run_conservation(&cfg.datum, cfg.grid, cfg.t_end)?,
        Command::Global => scenarios::run_global(&cfg.datum, cfg.grid, cfg.t_end)?,
        Command::Blowup => scenarios::run_blowup(&cfg.datum, cfg.grid)?,
        Command::Picard => {
            let (report, ledger) =
                scenarios::run_picard(&cfg.datum, cfg.grid, cfg.n_iter, cfg.t_iter)?;
            std::fs::write(out.join("ledger.json"), ledger.to_json()?)?;
            report
        }
        Command::Besov => {
            let mut report = scenarios::run_lp_soundness(cfg.grid, cfg.seed, cfg.samples)?;
            let norm = scenarios::datum_norm(&cfg.datum, cfg.grid, cfg.besov)?;
            report.estimate("datum_besov_norm", norm);
            let bank = crate::littlewood_paley::build_widest_filter_bank(cfg.grid)?;
            let record = NormReport::compute(&bank, &cfg.datum.sample(cfg.grid)?, cfg.besov)?;
            std::fs::write(
                out.join("norm.json"),
                serde_json::to_string_pretty(&record)?,
            )?;
            report
        }
        Command::Illposed => {
            illposed::run_norm_inflation(cfg.illposed, cfg.horizon_fraction, cfg.grid)?
        }
        Command::Uc => scenarios::run_unique_continuation(
            &cfg.datum,
            cfg.grid,
            cfg.t_end,
            cfg.window,
            cfg.c_forcing,
            cfg.forcing,
        )?,
    };
    report.write_to(out)?;
    Ok(report)
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let (command, common) = cli.command.split();
    let outcome = resolve(command, &common).and_then(|cfg| run(&cfg, &common.out, common.dump));
    match outcome {
        Ok(report) => {
            println!(
                "{}: {} ({:.2} s)",
                serde_json::to_value(report.scenario)
                    .map(|v| v.to_string())
                    .unwrap_or_default()
                    .trim_matches('"'),
                serde_json::to_string(&report.verdict).unwrap_or_default(),
                report.runtime_s
            );
            report.verdict.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
