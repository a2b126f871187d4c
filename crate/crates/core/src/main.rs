use std::process::ExitCode;

use clap::Parser;
use pivot_compress::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pvc: {err:#}");
            ExitCode::from(1)
        }
    }
}
