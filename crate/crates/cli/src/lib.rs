//! Command-line front end: configuration, the `solve`, `oracle`, `verify`
//! and `probe` experiments, and their artifacts.

pub mod commands;
pub mod config;
pub mod verify;

use std::path::Path;

use thiserror::Error;

pub use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_ABORTED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] rps_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    Failed(String),
}

fn core_exit_code(e: &rps_core::Error) -> i32 {
    use rps_core::Error as E;
    match e {
        E::InvalidGrid(_)
        | E::InvalidParameter { .. }
        | E::WrongSpace { .. }
        | E::GridMismatch(_)
        | E::AboveNyquist { .. }
        | E::TooLarge { .. }
        | E::Insufficient(_) => EXIT_INVALID,
        E::BoundaryContamination { .. }
        | E::StepRejected { .. }
        | E::NonContraction { .. }
        | E::NonFinite { .. } => EXIT_ABORTED,
        E::Ladder { source, .. } => core_exit_code(source),
        E::MissingSnapshot(_) | E::Format(_) | E::Io(_) | E::Json(_) => EXIT_FAILED,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_INVALID,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io(_) | CliError::Failed(_) => EXIT_FAILED,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

/// Sizes the global worker pool from `RPS_THREADS`; the default is the
/// available parallelism. Results do not depend on the count.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RPS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "RPS_THREADS must be a positive integer, got `{value}`"
            ))
        })?;
    // a pool that already exists (tests, repeated calls) is kept
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
