//! `stmesh`: build, tag, refine and check space-time pentatope meshes.
//!
//! Exit status is 0 when every check passed, 1 when a check failed (the
//! report is still written) and 2 for usage or input errors.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
