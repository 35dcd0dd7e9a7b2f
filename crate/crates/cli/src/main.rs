//! `lyapunov`: command-line front end for the Lyapunov exponent routes.
//!
//! Exit codes: 0 success, 1 a validation claim failed, 2 usage error,
//! 3 computation failure. Results go to standard output as JSON (tables as
//! CSV or JSON); diagnostics go to standard error.

mod cli;
mod commands;
mod config;

use std::fmt::Display;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use cli::{Cli, Command};
use commands::ValidateOutcome;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    pub fn compute(e: impl Display) -> Self {
        CliError::Compute(e.to_string())
    }
}

fn print_json(v: &Value) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(CliError::compute)?;
    writeln!(out).map_err(CliError::compute)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(n) = cli.parallelism {
        if n == 0 {
            return Err(CliError::Usage("--parallelism must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(CliError::compute)?;
    }
    match &cli.command {
        Command::Gamma(a) => print_json(&commands::gamma(a)?)?,
        Command::Sweep(a) => {
            let (summary, clean) = commands::sweep(a, cli.parallelism)?;
            if let Some(s) = summary {
                print_json(&s)?;
            }
            if !clean {
                return Err(CliError::Compute(
                    "some sweep points failed; see messages above".into(),
                ));
            }
        }
        Command::Validate(a) => {
            let (report, outcome) = commands::validate(a, cli.parallelism)?;
            print_json(&report)?;
            match outcome {
                ValidateOutcome::Pass => {}
                ValidateOutcome::Fail => {
                    eprintln!("validation: at least one claim fails");
                    return Ok(ExitCode::from(1));
                }
                ValidateOutcome::Indeterminate => {
                    return Err(CliError::Compute("a claim could not be evaluated".into()));
                }
            }
        }
        Command::ConstantC(a) => commands::constant(a, &mut io::stdout().lock())?,
        Command::Mc(a) => print_json(&commands::mc(a)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args = match config::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    run(cli).unwrap_or_else(report)
}

fn report(e: CliError) -> ExitCode {
    match e {
        CliError::Usage(m) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        CliError::Compute(m) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
