//! `gsd`: structural disparity experiments from the command line.
//!
//! Exit status is 0 on success, 2 for invalid flags, recipes or inputs and
//! 3 for I/O or numerical failures.

use std::process::ExitCode;

use clap::Parser;

mod commands;
mod error;
mod output;
mod recipe;

use commands::Command;
use error::CliError;
use output::Outputs;

#[derive(Debug, Parser)]
#[command(name = "gsd", version, about = "Graph structural disparity toolkit")]
pub struct Cli {
    /// Worker threads for seed- and cell-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let name = cli.command.name();
    let result: Result<(), CliError> = cli.command.execute(&mut Outputs::default());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: gsd {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
