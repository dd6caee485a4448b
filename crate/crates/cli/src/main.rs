//! `schouten`: curvature reports, continuation solves and identity suites
//! from a JSON manifest.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure or a failed suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod manifest;
mod report;
mod solve;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use error::CliError;
use manifest::{Manifest, Real};

#[derive(Parser)]
#[command(name = "schouten", version, about = "Modified Schouten tensor toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature ranges, integrals and the pinching margin of the manifest metric.
    Report {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continuation from the starting parameter to t0.
    Solve {
        manifest: PathBuf,
        /// Overrides `solver.t0`; accepts expressions such as `2/3`.
        #[arg(long)]
        t0: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-step CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Identity suites.
    Verify {
        manifest: PathBuf,
        /// A suite name or `all`; overrides the manifest list.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SCHOUTEN_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Validation(format!("SCHOUTEN_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Report { manifest, out } => {
            let m = Manifest::load(&manifest)?;
            emit(&report::run(&m)?, out.as_deref())
        }
        Command::Solve {
            manifest,
            t0,
            steps,
            out,
            trace,
        } => {
            let m = Manifest::load(&manifest)?;
            let t0 = t0.map(|s| Real::Expr(s).value("--t0")).transpose()?;
            let res = solve::run(&m, &solve::Overrides { t0, steps })?;
            if let Some(p) = &trace {
                solve::write_trace(p, &res.path)?;
            }
            emit(&res, out.as_deref())?;
            match &res.status {
                schouten_core::solver::SolveStatus::Converged => Ok(()),
                schouten_core::solver::SolveStatus::Stalled { last_good_t, reason } => Err(CliError::Numerical(format!(
                    "continuation stalled at t = {last_good_t}: {reason}"
                ))),
            }
        }
        Command::Verify { manifest, suite, seed, out } => {
            let m = Manifest::load(&manifest)?;
            let res = verify::run(&m, suite.as_deref(), seed)?;
            emit(&res, out.as_deref())?;
            if res.all_pass() {
                Ok(())
            } else {
                let names: Vec<&str> = res.reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
                Err(CliError::Numerical(format!("{} check(s) failed: {}", res.failed, names.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
