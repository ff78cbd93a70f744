//! `swapfit`: fits, pre-checks and reports for SWAP regression.
//!
//! Exit status: 0 success, 1 a check came out negative, 2 bad input,
//! 3 a fit failed.

mod artifacts;
mod commands;
mod failure;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use crate::failure::Failure;
use crate::settings::{Cli, Command, Settings};

fn run(command: &Command) -> Result<u8, Failure> {
    let settings = Settings::resolve(command.flags())?;
    match command {
        Command::Fit { truth, .. } => commands::fit(&settings, truth.as_deref()),
        Command::Precheck { .. } => commands::precheck(&settings),
        Command::Gof { .. } => commands::gof(&settings),
        Command::Timeline { .. } => commands::timeline(&settings),
        Command::Synth { scenario, brute_force, .. } => commands::synth(&settings, scenario, *brute_force),
        Command::Verify { .. } => commands::verify_dir(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("swapfit {}: {f}", cli.command.name());
            ExitCode::from(f.code)
        }
    }
}
