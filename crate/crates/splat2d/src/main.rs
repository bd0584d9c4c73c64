use std::process::ExitCode;

use clap::Parser;
use splat2d::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("splat2d: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
