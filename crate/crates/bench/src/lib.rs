//! Command-line front end for the `hybrid-pipecg` solvers: builds manufactured
//! problems, runs strategies and writes JSON run records or CSV tables.

pub mod cli;
pub mod commands;
pub mod error;
pub mod problem;
pub mod record;
pub mod run;

pub use error::{exit, CliError};
pub use problem::{build_problem, Problem, ProblemSpec, Source};
pub use record::{CompareRow, DeviceSnapshot, RunRecord};
pub use run::{run_strategy, RunConfig, Strategy};

/// Runs a parsed command line and returns the process exit code.
pub fn dispatch(cli: &cli::Cli) -> u8 {
    let result = match &cli.command {
        cli::Command::Solve(args) => commands::cmd_solve(args),
        cli::Command::Compare(args) => commands::cmd_compare(args),
        cli::Command::Profile(args) => commands::cmd_profile(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
