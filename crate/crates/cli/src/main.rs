//! `spinscramble` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric or I/O failure.

mod args;
mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::RunError;
use crate::config::RunConfig;

fn configure_threads(parallelism: usize) {
    if parallelism > 0 {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(parallelism).build_global();
    }
}

fn run(command: Command) -> Result<Vec<String>, RunError> {
    let config: RunConfig = match command {
        Command::Replay(replay) => {
            let mut config = commands::load_manifest(&replay.manifest)?.config;
            if let Some(out) = replay.out {
                config.common.out = out;
            }
            config
        }
        other => args::resolve(other).map_err(RunError::Usage)?,
    };
    configure_threads(config.common.parallelism);
    let outputs = commands::execute(&config)?;
    eprintln!("{}: wrote {} files to {}", config.job.name(), outputs.len(), config.common.out.display());
    Ok(outputs)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
