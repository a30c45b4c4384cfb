//! Batch driver for the memwave experiments.
//!
//! A run reads a [`config::RunConfig`], executes one experiment, writes its
//! CSV tables and a `manifest.txt` into the output directory, and maps the
//! outcome to a process exit code (see [`CliError::exit_code`]).

pub mod config;
pub mod experiments;
pub mod output;

use std::fmt;
use std::path::{Path, PathBuf};

use memwave_core::ErrorClass;

use config::{ConfigError, RunConfig};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "MEMWAVE_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Model(memwave_core::Error),
    Output(std::io::Error),
    /// Files were written but at least one embedded check failed.
    Check(Vec<String>),
}

impl CliError {
    /// 1 failed check, 2 config, 3 constraint, 4 numerical convergence,
    /// 5 conditioning, 6 output I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Model(e) => match e.class() {
                ErrorClass::Constraint => 3,
                ErrorClass::Convergence => 4,
                ErrorClass::Conditioning => 5,
            },
            CliError::Output(_) => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "cannot write output: {e}"),
            CliError::Check(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<memwave_core::Error> for CliError {
    fn from(e: memwave_core::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub directory: PathBuf,
    /// `(file name, sha256)` of every CSV, in write order.
    pub files: Vec<(String, String)>,
    pub checks: Vec<(String, bool)>,
}

/// Runs `config`, writing into `out` (or the configured directory) and
/// overriding the seed when given.
pub fn run(
    config: &RunConfig,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<RunOutcome, CliError> {
    let mut config = config.clone();
    if let Some(seed) = seed {
        config.seed = seed;
        config.echo.retain(|(k, _)| k != "seed");
        config.echo.push(("seed".into(), seed.to_string()));
    }
    let directory = out.map_or_else(|| config.output.clone(), Path::to_path_buf);
    let result = experiments::run_experiment(&config)?;
    let files = output::write_tables(&directory, &result.tables)?;
    let manifest = output::render_manifest(&config.echo, &files, &result.checks);
    std::fs::write(directory.join("manifest.txt"), manifest)?;
    let failed: Vec<String> = result
        .checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.clone())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Check(failed));
    }
    Ok(RunOutcome {
        directory,
        files,
        checks: result.checks,
    })
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{value}`"))?;
    if threads == 0 {
        return Err(format!("{THREADS_ENV} must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_class() {
        use memwave_core::Error;
        assert_eq!(CliError::Check(vec![]).exit_code(), 1);
        assert_eq!(
            CliError::Config(ConfigError {
                line: 1,
                field: None,
                message: String::new()
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::Model(Error::ConstraintViolation(String::new())).exit_code(),
            3
        );
        assert_eq!(
            CliError::Model(Error::NotConverged(String::new())).exit_code(),
            4
        );
        assert_eq!(
            CliError::Model(Error::NotPositiveDefinite {
                min_eigenvalue: 0.0,
                max_eigenvalue: 1.0
            })
            .exit_code(),
            5
        );
        assert_eq!(CliError::Output(std::io::Error::other("x")).exit_code(), 6);
    }
}
