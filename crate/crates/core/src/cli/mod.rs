//! The `shadowlab` command line runner.
//!
//! Exit codes: 0 all enabled checks pass, 1 a bound check failed (or an
//! internal error), 2 configuration, parse or domain error, 3 the map does
//! not admit the requested gluing.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::Error;

pub mod config;
pub mod output;
pub mod run;

pub use config::{Checks, FamilySpec, RawConfig};
pub use output::{num, StateColumns, Table, SCHEMA_LINE};
pub use run::{ExperimentConfig, Options, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_BOUND: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "shadowlab", version, about = "Shadowing of perturbed dynamical systems by gluing")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run a single seed, overriding the configured seeds.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Window radius, overriding `[run] radius`.
    #[arg(long, global = true, value_name = "N")]
    radius: Option<i64>,

    /// Report the bounds but do not let them decide the exit status.
    #[arg(long = "no-bound-checks", global = true)]
    no_bound_checks: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify generated pseudo-trajectories into perturbation types.
    Classify,
    /// Build shadowing orbits and check the error bounds.
    Shadow,
    /// Repeat `shadow` over a parameter grid.
    Sweep,
    /// Primitivity exponent of a transition matrix file.
    Primitive {
        #[arg(value_name = "FILE")]
        file: PathBuf,
    },
    /// Fit the backward decay exponent near a neutral fixed point.
    DecayFit,
    /// Dump a single gluing certificate.
    Glue,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Parameter(_) | Error::Usage(_) | Error::Domain { .. } => {
            EXIT_CONFIG
        }
        Error::Unsupported(_) | Error::NonGluable { .. } => EXIT_UNSUPPORTED,
        Error::Internal(_) => EXIT_BOUND,
    }
}

fn explain(e: &Error) -> Option<&'static str> {
    let msg = e.to_string();
    match e {
        Error::Unsupported(_) if msg.contains("neutral subspace") => Some(
            "an eigenvalue on the unit circle leaves a neutral subspace, along which \
             orbits neither contract nor expand; no summable gluing rate exists",
        ),
        Error::Unsupported(_) if msg.contains("not primitive") => {
            Some("gluing symbol sequences needs a primitive transition matrix")
        }
        _ => None,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        radius: cli.radius,
        no_bound_checks: cli.no_bound_checks,
    };
    let result = match &cli.command {
        Command::Classify => run::classify(&opts),
        Command::Shadow => run::shadow(&opts),
        Command::Sweep => run::sweep(&opts),
        Command::Primitive { file } => run::primitive(file),
        Command::DecayFit => run::decay_fit(&opts),
        Command::Glue => run::glue(&opts),
    };
    match result {
        Ok(report) => {
            for l in &report.lines {
                println!("{l}");
            }
            if report.pass || opts.no_bound_checks {
                EXIT_PASS
            } else {
                eprintln!("bound check failed");
                EXIT_BOUND
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(why) = explain(&e) {
                eprintln!("note: {why}");
            }
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run_with(std::env::args_os())
}
