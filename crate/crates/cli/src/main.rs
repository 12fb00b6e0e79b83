use std::process::ExitCode;

use clap::Parser;
use manna_cli::args::Cli;
use manna_cli::{run, write_outputs};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = write_outputs(dir, &outcome) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.stdout),
    }
    ExitCode::from(outcome.exit)
}
