use clap::Parser;
use ldrn::cli::{run, Cli, CliError};
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ CliError::Check(_)) => {
            eprintln!("{err}");
            ExitCode::from(1)
        }
        Err(err @ CliError::Usage(_)) => {
            eprintln!("{err}");
            ExitCode::from(2)
        }
    }
}
