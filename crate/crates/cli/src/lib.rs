//! Command-line driver for the `entropic-map` library.
//!
//! Every subcommand produces a [`report::RunReport`] written as JSON to standard output or to
//! `--output`. Diagnostics go to standard error. Exit codes are 0 on success, 1 for input
//! problems (malformed or degenerate data, unsupported sizes, I/O) and 2 for invalid flags.

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod io;
pub mod report;

use args::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] entropic_map::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(entropic_map::Error::InvalidParameter(_)) => 2,
            CliError::Input(_) | CliError::Core(_) => 1,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (mut report, output): (_, Option<&Path>) = match &cli.command {
        Command::Fit(a) => (commands::fit(a)?, a.output.as_deref()),
        Command::Oracle(a) => (commands::oracle(a)?, a.output.as_deref()),
        Command::Compare(a) => (commands::compare(a)?, a.output.as_deref()),
        Command::Plsi(a) => (commands::plsi(a)?, a.output.as_deref()),
        Command::Gen(a) => (commands::gen(a)?, None),
    };
    if cli.timing {
        report.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    io::emit(output, &report.to_json()?)
}

/// Parses `argv` and runs the selected command, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
