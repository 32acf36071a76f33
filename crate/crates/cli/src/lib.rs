//! Batch front end for the landing simulator: scenario files, single runs,
//! pad-pitch sweeps and their output files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use slopeland::{Outcome, RunSummary, SimError, TrajectoryLog};
use thiserror::Error;

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{apply_overrides, parse_config, serialize_config, ConfigError};
pub use output::{emit_summary, emit_trajectory, Format};
pub use sweep::{run_sweep, SweepReport, SweepRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("trajectory log is empty")]
    EmptyLog,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("pitch list is empty")]
    EmptyPitchList,
    #[error("bad pitch list: {0}")]
    BadPitchList(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED_RUN: i32 = 2;

/// 0 when every run landed or aborted as designed, 2 otherwise.
pub fn exit_code_for(outcomes: impl IntoIterator<Item = Outcome>) -> i32 {
    let nominal = outcomes
        .into_iter()
        .all(|o| matches!(o, Outcome::Landed | Outcome::AbortedRecovered));
    if nominal {
        EXIT_OK
    } else {
        EXIT_FAILED_RUN
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(path, bytes).map_err(io_err)
}

/// Writes `trajectory.csv`, `trajectory.json` and `summary.json` into `dir`.
pub fn write_run(dir: &Path, log: &TrajectoryLog, summary: &RunSummary) -> Result<(), CliError> {
    write_file(&dir.join("trajectory.csv"), &emit_trajectory(log, Format::Csv)?)?;
    write_file(&dir.join("trajectory.json"), &emit_trajectory(log, Format::Json)?)?;
    write_file(&dir.join("summary.json"), &emit_summary(summary)?)
}

/// Parses `10,25,40` (degrees) into radians.
pub fn parse_pitch_list(text: &str) -> Result<Vec<f64>, CliError> {
    let pitches = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(f64::to_radians)
                .ok_or_else(|| CliError::BadPitchList(format!("`{s}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if pitches.is_empty() {
        return Err(CliError::EmptyPitchList);
    }
    Ok(pitches)
}
