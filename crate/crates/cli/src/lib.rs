//! The `relent` command: entropies, relative entropies, free distances and
//! sequence experiments from JSON state files and manifests.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
//! 3 a verify suite failed.

pub mod descriptor;
pub mod manifest;
pub mod report;
pub mod state_file;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use relent_core::entropy::{mutual_information, relative_entropy, von_neumann_entropy, SUPPORT_TOL};
use relent_core::solver::{free_distance, SolverConfig};
use relent_core::{Error, Extended, SystemLayout};

use crate::descriptor::parse_descriptor;
use crate::manifest::Manifest;
use crate::state_file::read_state;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) | Self::Io(_) => 2,
        }
    }
}

fn numerical(e: Error) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "relent", version, about = "Relative-entropy distances to free quantum states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Von Neumann entropy of a state, in nats.
    Entropy { state: PathBuf },
    /// D(ρ‖σ), or "inf" when ρ leaks outside the support of σ.
    Relent { rho: PathBuf, sigma: PathBuf },
    /// Mutual information across the factors given by --dims (e.g. 2x2).
    Mi {
        state: PathBuf,
        #[arg(long)]
        dims: Option<String>,
    },
    /// Bracket on the distance to a free set.
    Ree {
        state: PathBuf,
        #[arg(long = "free-set")]
        free_set: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sequence experiments.
    Seq {
        #[command(subcommand)]
        action: SeqAction,
    },
    /// Randomized identity checks on the entropy routines.
    Verify {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum SeqAction {
    /// Run the continuity harness described by a manifest.
    Run {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Six decimals, `inf` for `+∞`, and no negative zero.
pub fn fmt_value(x: f64) -> String {
    if x == f64::INFINITY {
        return "inf".into();
    }
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn fmt_extended(x: Extended<f64>) -> String {
    fmt_value(x.to_f64())
}

fn parse_dims(s: &str) -> Result<Vec<usize>, CliError> {
    s.split('x')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad --dims {s:?}, expected e.g. 2x3"))))
        .collect()
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Entropy { state } => {
            let rho = read_state(&state)?;
            writeln!(out, "{}", fmt_extended(von_neumann_entropy(rho.positive())))?;
        }
        Command::Relent { rho, sigma } => {
            let (rho, sigma) = (read_state(&rho)?, read_state(&sigma)?);
            if rho.dim() != sigma.dim() {
                return Err(CliError::Usage(format!("dimensions differ: {} vs {}", rho.dim(), sigma.dim())));
            }
            writeln!(out, "{}", fmt_extended(relative_entropy(rho.positive(), sigma.positive(), SUPPORT_TOL)))?;
        }
        Command::Mi { state, dims } => {
            let mut rho = read_state(&state)?;
            if let Some(d) = dims {
                let layout = SystemLayout::new(parse_dims(&d)?).map_err(|e| CliError::Usage(e.to_string()))?;
                rho = rho.with_layout(layout).map_err(|e| CliError::Usage(e.to_string()))?;
            }
            let mi = mutual_information(&rho).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(out, "{}", fmt_value(mi.via_entropies))?;
        }
        Command::Ree { state, free_set, tol, max_iter, seed } => {
            let rho = read_state(&state)?;
            let model = parse_descriptor(&free_set, rho.layout(), Path::new("."))?;
            let mut cfg = SolverConfig::default();
            if let Some(t) = tol {
                cfg.stopping_gap = t;
            }
            if let Some(m) = max_iter {
                cfg.max_iterations = m;
            }
            if let Some(s) = seed {
                cfg.oracle.seed = s;
            }
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let r = free_distance(&rho, &model, &cfg).map_err(numerical)?;
            writeln!(out, "[{}, {}] iterations {}", fmt_extended(r.lower), fmt_extended(r.upper), r.iterations)?;
            if let Some(d) = &r.diagnostic {
                writeln!(err, "warning: {d}")?;
            }
        }
        Command::Seq { action: SeqAction::Run { manifest, out: dir, seed } } => {
            let mut m = Manifest::read(&manifest)?;
            if let Some(s) = seed {
                m.seed = s;
            }
            let base = manifest.parent().unwrap_or(Path::new("."));
            let exp = m.build(base)?;
            let report = relent_core::sequence::run_continuity_harness(&exp.sequence, &exp.models, &exp.config)
                .map_err(numerical)?;
            let verdict = report::write_report(&report, &dir)?;
            writeln!(out, "{verdict}")?;
            let failed = report
                .models
                .iter()
                .flat_map(|m| m.rows.iter().chain(std::iter::once(&m.limit)))
                .filter(|r| r.oracle_failure)
                .count();
            if failed > 0 {
                writeln!(err, "error: {failed} solves stopped on an unconverged oracle; brackets are partial")?;
                return Ok(2);
            }
        }
        Command::Verify { count, seed } => {
            let suites = verify::run_suites(count, seed);
            for s in &suites {
                writeln!(out, "{}: {}/{} passed (worst deviation {:.3e})", s.name, s.passed, s.total, s.worst)?;
            }
            if !suites.iter().all(verify::SuiteOutcome::ok) {
                return Ok(3);
            }
        }
    }
    Ok(0)
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
