//! Subcommands of the `ogica` binary, usable as a library for testing.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use ogica::IcaError;
use thiserror::Error;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Io = 2,
    Numerical = 3,
    NotConverged = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// Input that could not be read or did not form a valid data matrix.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: IcaError,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Ica(#[from] IcaError),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::Usage,
            CliError::Input { .. } | CliError::File { .. } | CliError::Json { .. } => ExitCode::Io,
            CliError::Ica(e) if e.is_numerical() => ExitCode::Numerical,
            CliError::Ica(IcaError::Io { .. } | IcaError::Parse { .. } | IcaError::NonFinite { .. }) => ExitCode::Io,
            CliError::Ica(_) => ExitCode::Usage,
        }
    }
}

/// Parse `args` (program name first), run the subcommand, report errors on
/// stderr and return the process exit code.
pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::Success,
                _ => ExitCode::Usage,
            };
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
