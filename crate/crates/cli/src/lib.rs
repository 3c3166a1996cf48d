//! `tracelab` command-line front end.
//!
//! Exit statuses: 0 success, 2 usage error, 3 data or file-format error,
//! 4 degenerate data or a target that was not reached.

mod args;
mod commands;
pub mod tracefile;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("not reached: {0}")]
    NotReached(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Degenerate(_) | CliError::NotReached(_) => EXIT_DEGENERATE,
        }
    }
}

impl From<tracelab_core::Error> for CliError {
    fn from(e: tracelab_core::Error) -> Self {
        use tracelab_core::Error as E;
        match e {
            E::Config(_) | E::InvalidOperand(_) | E::Hex(_) => CliError::Usage(e.to_string()),
            E::DegenerateData(_) | E::InsufficientData { .. } => CliError::Degenerate(e.to_string()),
        }
    }
}

impl From<tracefile::TraceFileError> for CliError {
    fn from(e: tracefile::TraceFileError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

/// Parses `argv` (program name first), runs the command writing its
/// regular output to `out`, and returns the exit status. Diagnostics go to
/// stderr.
pub fn run_with<I, T, W>(argv: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let invocation = std::iter::once("tracelab".to_string())
        .chain(argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()))
        .collect::<Vec<_>>()
        .join(" ");
    match commands::dispatch(cli, &invocation, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tracelab: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock())
}
