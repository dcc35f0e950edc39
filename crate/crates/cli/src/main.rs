//! `expfun`: solve, validate, transform and simulate exponential functionals
//! of killed subordinators from a JSON model file.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 a check failed.
//! Failures print one `error: kind=<kind> message="<text>"` line on stderr.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod commands;
mod config;
mod failure;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig};
use failure::Failure;

fn start(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let cfg = RunConfig::from_cli(cli)?;
    commands::run(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            let msg = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", Failure::Config(msg.to_string()).line());
            return ExitCode::from(2);
        }
    };
    match start(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit_code())
        }
    }
}
