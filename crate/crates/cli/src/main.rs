use std::process::ExitCode;

use clap::Parser;
use liralab_cli::Cli;

fn main() -> ExitCode {
    match liralab_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
