//! `hermite-approx`: reproducible experiments over the hermite-approx library.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error,
//! 3 violated precondition, 4 audit violation, 5 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use config::{Args, Params};
use error::CliError;

/// Caps the worker threads of the global pool.
const THREADS_ENV: &str = "HERMITE_APPROX_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV}='{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads()
        .and_then(|()| Params::resolve(args))
        .and_then(|p| experiments::run(&p));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hermite-approx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
