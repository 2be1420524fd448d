use std::process::ExitCode;

use clap::Parser;
use linkspectra::cli::Cli;
use linkspectra::{run, RunConfig};

fn main() -> ExitCode {
    let cfg: RunConfig = Cli::parse().into();
    match run(&cfg) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
