mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "shiftlab",
    version,
    about = "Spectral shift measures and multiple operator integrals on Hermitian matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral shift measure: density CSV, atom sidecar and provenance record
    Shift(RunConfig),
    /// m-th derivative of f(A + tK) at one point or over a sweep
    Derivative(RunConfig),
    /// Taylor remainder by both evaluation paths with their residual
    Taylor(RunConfig),
    /// Besov seminorms by differences and by dyadic pieces
    Besov(RunConfig),
    /// Property suite; exit 0 iff every property passes
    Verify(RunConfig),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Shift(c) => c.resolve().and_then(|c| commands::shift(&c)),
        Command::Derivative(c) => c.resolve().and_then(|c| commands::derivative(&c)),
        Command::Taylor(c) => c.resolve().and_then(|c| commands::taylor(&c)),
        Command::Besov(c) => c.resolve().and_then(|c| commands::besov(&c)),
        Command::Verify(c) => c.resolve().and_then(|c| commands::verify(&c)),
    };
    match result {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
