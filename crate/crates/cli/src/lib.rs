//! Command-line driver: argument and config handling, CSV/JSON I/O and the
//! subcommands. The binary is a thin wrapper over [`main_with_args`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;

use clap::Parser;

pub use commands::Cli;
pub use error::{CliError, CliResult, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

/// Parse `args` (program name first), run, and return the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
