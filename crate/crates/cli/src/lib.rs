//! Command-line front end for `metaplectic-core`.
//!
//! Every subcommand prints JSON (with `"schema": 1`) or CSV. Output is a
//! pure function of the flags, so repeated runs are byte-identical.

mod args;
mod commands;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::Parser;

pub use args::{parse_half_int, parse_triple, Cli, Command};

/// Version of the JSON layout.
pub const SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    Parameter(String),
    NonConvergence(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parameter(_) => EXIT_PARAMETER,
            CliError::NonConvergence(_) => EXIT_NONCONVERGENCE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parameter(s) | CliError::NonConvergence(s) => f.write_str(s),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<metaplectic_core::Error> for CliError {
    fn from(e: metaplectic_core::Error) -> Self {
        match e {
            metaplectic_core::Error::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            _ => CliError::Parameter(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<&str> for CliError {
    fn from(s: &str) -> Self {
        CliError::Parameter(format!("invalid parameter: {s}"))
    }
}

impl From<String> for CliError {
    fn from(s: String) -> Self {
        CliError::Parameter(format!("invalid parameter: {s}"))
    }
}

/// Parse `argv` (program name first), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMETER } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command, writing to `--out` or standard output.
///
/// The output file is created on the first write, so a command rejected
/// during validation leaves no file behind.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut out = BufWriter::new(LazyOut { path: cli.out.clone(), inner: None });
    commands::dispatch(&cli.command, &mut out)?;
    out.flush()?;
    Ok(())
}

struct LazyOut {
    path: Option<PathBuf>,
    inner: Option<Box<dyn Write>>,
}

impl LazyOut {
    fn get(&mut self) -> io::Result<&mut Box<dyn Write>> {
        if self.inner.is_none() {
            self.inner = Some(match &self.path {
                Some(p) => Box::new(File::create(p)?),
                None => Box::new(io::stdout().lock()),
            });
        }
        Ok(self.inner.as_mut().unwrap())
    }
}

impl Write for LazyOut {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.get()?.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        match &mut self.inner {
            Some(w) => w.flush(),
            None => Ok(()),
        }
    }
}
