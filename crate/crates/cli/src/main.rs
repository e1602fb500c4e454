mod args;
mod commands;
mod error;
mod report;

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use log::info;
use serde::Serialize;

use args::{Cli, Command};
use commands::Outcome;
use error::{CliError, ExitClass};
use report::CliReport;

const THREADS_VAR: &str = "RANKGAUGE_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot start thread pool: {e}")))
}

fn emit<T: Serialize>(
    command: &'static str,
    outcome: Outcome<T>,
    started: Option<Instant>,
) -> Result<(), CliError> {
    let report = CliReport::new(command, outcome.inputs, outcome.outputs)
        .with_timing(started.map(|t| t.elapsed()));
    report
        .write_json(io::stdout().lock())
        .map_err(|e| CliError::input(format!("cannot write report: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let t0 = Instant::now();
    let started = cli.timing.then_some(t0);
    match &cli.command {
        Command::Compute(a) => emit("compute", commands::compute(a)?, started)?,
        Command::Select(a) => emit("select", commands::select(a)?, started)?,
        Command::Converge(a) => {
            let outcome = commands::converge(a)?;
            if a.csv {
                io::stdout()
                    .lock()
                    .write_all(outcome.outputs.to_csv().as_bytes())
                    .map_err(|e| CliError::input(format!("cannot write curve: {e}")))?;
            } else {
                emit("converge", outcome, started)?;
            }
        }
        Command::Correlate(a) => emit("correlate", commands::correlate(a)?, started)?,
    }
    info!("finished in {:.1} ms", t0.elapsed().as_secs_f64() * 1e3);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // Usage errors are input errors, not clap's default status 2.
                _ => ExitClass::Input.into(),
            };
        }
    };

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.class.into()
        }
    }
}
