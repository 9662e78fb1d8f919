//! `qse`: entropy estimates, synthetic samples, tuning, and figure tables.
//!
//! Exit status: 0 on success, 2 for unreadable input or bad arguments,
//! 3 when an estimator fails, 4 when a figure has invalid cells (the table
//! is still written), 1 for anything else.

mod args;
mod commands;
mod error;
mod input;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("cannot start {n} workers: {e}")))?;
    }
    match cli.command {
        Command::Estimate(a) => emit(&commands::estimate(&a)?, None),
        Command::Tune(a) => emit(&commands::tune(&a)?, None),
        Command::Sample(a) => emit(&commands::sample(&a)?, a.out.as_deref()),
        Command::Figure(a) => {
            let (table, invalid) = commands::figure(&a)?;
            emit(&table, a.out.as_deref())?;
            if invalid.is_empty() {
                Ok(())
            } else {
                Err(CliError::InvalidCells(invalid))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qse: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
