use std::process::ExitCode;

use clap::Parser;
use pipecg_bench::cli::Cli;
use pipecg_bench::exit;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::CONVERGED
            });
        }
    };
    ExitCode::from(pipecg_bench::dispatch(&cli))
}
