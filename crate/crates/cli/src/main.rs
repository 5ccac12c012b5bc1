//! `combkit` command-line front end.
//!
//! Exit codes: 0 success, 1 failed self-check, 2 usage or I/O error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{curve, realize, trajectory, verify};

enum Failure {
    Usage(String),
    Io(std::io::Error),
}

impl From<combkit::Error> for Failure {
    fn from(e: combkit::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

/// Returns whether every self-check passed.
fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Curve(a) => {
            output::emit(a.common.out.as_deref(), &curve::run(a)?)?;
            Ok(true)
        }
        Command::Verify(a) => {
            let r = verify::report(a)?;
            output::emit(a.common.out.as_deref(), &pretty(&r))?;
            Ok(r.pass)
        }
        Command::Realize(a) => {
            let r = realize::dump(a)?;
            output::emit(a.common.out.as_deref(), &pretty(&r))?;
            Ok(r.self_check.pass)
        }
        Command::Trajectory(a) => {
            let ts = trajectory::run(a)?;
            output::emit(a.common.out.as_deref(), &trajectory::json_lines(&ts))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("combkit: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("combkit: verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("combkit: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("combkit: {e}");
            ExitCode::from(2)
        }
    }
}
