use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    ExitCode::from(gmc_lab::run(gmc_lab::Cli::parse()))
}
