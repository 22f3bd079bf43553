use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use macalloc_cli::{commands, CliError, Problem};

/// Rate allocation over the Gaussian multiple-access channel capacity region.
///
/// Rates are in nats per channel use unless stated otherwise.
#[derive(Parser)]
#[command(name = "macalloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the problem's utility and write the iteration trace as CSV.
    Solve {
        problem: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Report rates in bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Test a rate tuple for achievability.
    Check {
        problem: PathBuf,
        /// One rate per user, in user order.
        #[arg(long = "rate", allow_negative_numbers = true)]
        rates: Vec<f64>,
    },
    /// List every capacity constraint of the region.
    Region { problem: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Solve {
            problem,
            trace,
            bits,
        } => commands::cmd_solve(&Problem::load(&problem)?, &trace, bits, &mut stdout),
        Command::Check { problem, rates } => {
            commands::cmd_check(&Problem::load(&problem)?, &rates, &mut stdout)
        }
        Command::Region { problem } => commands::cmd_region(&Problem::load(&problem)?, &mut stdout),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
