//! Batch driver for the loopbie scattering solver.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

pub use commands::{run, Outcome};
pub use config::{Command, RunFile};
pub use error::{CliError, Result};
pub use report::Provenance;

/// Environment variable read when the run file does not set `threads`.
pub const THREADS_ENV: &str = "LOOPBIE_THREADS";

/// Thread count from the run file, then the environment, then the machine.
pub fn thread_count(file: &RunFile) -> Result<usize> {
    if let Some(n) = file.config.threads {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Loads, validates and runs a run file on a dedicated thread pool.
pub fn run_file(command: Command, path: &Path) -> Result<Outcome> {
    let mut file = RunFile::load(path)?;
    file.validate(command)?;
    let threads = thread_count(&file)?;
    let prov = Provenance::new(&file.text, threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| run(&file, &prov))
}
