//! `rhi-lab`: constants, verification, corpus sweeps, sharpness searches,
//! μ-grid dumps and maximal-function profiles from the command line.
//!
//! Exit status: 0 on success, 2 when a verdict fails, 1 on usage, parse or
//! I/O errors.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn configure_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let from_env = match std::env::var("RHI_LAB_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("RHI_LAB_THREADS must be a positive integer, got {v:?}"))?),
        Err(_) => None,
    };
    if let Some(n) = from_env.or(flag).filter(|n| *n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads(cli.threads)?;
    let outcome = match &cli.command {
        Command::Constants(a) => commands::run_constants(a)?,
        Command::Verify(a) => commands::run_verify(a)?,
        Command::Sweep(a) => commands::run_sweep(a)?,
        Command::Sharpness(a) => commands::run_sharpness(a)?,
        Command::Grid(a) => commands::run_grid(a)?,
        Command::Profile(a) => commands::run_profile(a)?,
    };
    output::emit(&cli, &outcome)?;
    Ok(outcome.holds)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
