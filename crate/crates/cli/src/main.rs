use std::process::ExitCode;

use clap::Parser;
use holdervar_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(unused) => {
            for k in unused {
                eprintln!("warning: config key {k:?} was not used");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
