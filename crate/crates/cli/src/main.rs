//! `gridroute` command-line interface.
//!
//! Exit codes: 0 on success with zero residual violation, 2 when the final
//! solution still violates the budget (reported, not hidden), 1 on input or
//! I/O errors.

mod commands;
mod report;
mod svg;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            std::process::exit(0);
        }
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(1);
        }
    };
    let code = match commands::dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}
