//! Command-line front end for the `adtrw` library.
//!
//! Subcommands map one-to-one onto the library surface: exact tables
//! (`density`, `states`, `bell`, `walk`, `sibuya`, `actrw`), analytics
//! (`analyze`, `invert-bias`), Monte Carlo (`mc`, `actrw --mc`) and the
//! acceptance suite (`verify`).
//!
//! Conventions:
//! * every output embeds tool version, resolved parameters, and — for
//!   Monte Carlo — seed, shard count and sample count, so artifacts are
//!   reproducible from their own headers;
//! * outputs are written atomically (temp file + rename);
//! * exit code 0 = success, 1 = validation error, 2 = request outside the
//!   numerical envelope;
//! * `ADTRW_THREADS` caps shard parallelism (0 or unset = automatic).

pub mod commands;
pub mod config;
pub mod output;

use std::process::ExitCode;

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<adtrw::AdtrwError> for CliError {
    fn from(e: adtrw::AdtrwError) -> Self {
        CliError {
            message: e.to_string(),
            code: if e.is_envelope() { 2 } else { 1 },
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::validation(e.message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(format!("i/o error: {e}"))
    }
}

/// Entry point used by `main` and by end-to-end tests.
pub fn run(argv: &[String]) -> ExitCode {
    init_thread_pool();
    match commands::dispatch(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// `ADTRW_THREADS` caps rayon parallelism; 0 or unset leaves the default.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("ADTRW_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                // A second initialization (tests call run() repeatedly)
                // fails harmlessly; the first pool wins.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
