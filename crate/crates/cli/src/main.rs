//! `cfheat`: solve and verify Caputo-Fabrizio heat problems from the command line.
//!
//! Exit status: 0 on success; 1 for configuration, parse, input and I/O
//! errors; 2 when a compatibility condition fails or, with
//! `--check-hypotheses`, when the forcing violates the existence hypotheses.

mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    /// Malformed input file.
    Input(String),
    /// Forcing expression does not parse.
    Parse(String),
    /// Forcing evaluation hit a domain error.
    Eval(String),
    Solver(String),
    Compatibility(String),
    Hypothesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compatibility(_) | CliError::Hypothesis(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Input(m) => write!(f, "malformed input: {m}"),
            CliError::Parse(m) => write!(f, "expression: {m}"),
            CliError::Eval(m) => write!(f, "evaluation: {m}"),
            CliError::Solver(m) => write!(f, "{m}"),
            CliError::Compatibility(m) => write!(f, "{m}"),
            CliError::Hypothesis(m) => write!(f, "hypotheses violated: {m}"),
        }
    }
}

impl From<cfheat::Error> for CliError {
    fn from(e: cfheat::Error) -> Self {
        match e {
            cfheat::Error::Compatibility { .. } => CliError::Compatibility(e.to_string()),
            cfheat::Error::HypothesisViolation(v) => CliError::Hypothesis(v.join("; ")),
            other => CliError::Solver(other.to_string()),
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Ivp(a) => commands::run_ivp(a.resolve()?),
        Command::Bvp(a) => commands::run_bvp(a.resolve()?),
        Command::Verify(a) => commands::run_verify(a.resolve()?),
        Command::Bases(a) => commands::run_bases(a.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
