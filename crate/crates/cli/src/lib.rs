//! Command-line front end: argument parsing, JSON/CSV/plain records, the
//! on-disk result cache and the acceptance suite behind `cis verify-all`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid arguments,
//! 3 numerical non-convergence, 4 resource cap exceeded.

pub mod acceptance;
pub mod args;
pub mod cache;
pub mod commands;
pub mod output;
pub mod record;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;

pub use record::ResultRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_CAP_EXCEEDED: i32 = 4;

/// Worker cap for the Monte Carlo thread pool.
pub const THREADS_ENV: &str = "CIS_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<cis_core::Error> for CliError {
    fn from(e: cis_core::Error) -> Self {
        use cis_core::Error as E;
        let code = match e {
            E::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
            E::SpaceTooLarge { .. } => EXIT_CAP_EXCEEDED,
            E::InternalInconsistency(_) => EXIT_VERIFY_FAILED,
            E::MultiplicityViolation { .. } | E::AlphabetViolation { .. } | E::Domain(_) | E::InvalidArgument(_) => {
                EXIT_USAGE
            }
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer")))?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `argv`, runs the command, writes its output, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_parsed(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn run_parsed(cli: &args::Cli) -> Result<i32, CliError> {
    configure_threads()?;
    let cache = (!cli.no_cache).then(cache::Cache::from_env);
    let exe = std::env::current_exe().ok();
    let ctx = commands::Context {
        cache: cache.as_ref(),
        exe: exe.as_deref().filter(|p| is_cis_binary(p)),
    };
    let outcome = commands::execute(&cli.command, &ctx)?;
    let text = output::render(&outcome.record, cli.format);
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if outcome.failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

fn is_cis_binary(path: &Path) -> bool {
    path.file_stem().is_some_and(|s| s == "cis")
}
