use std::path::Path;

use rayon::prelude::*;
use slopeland::{run_scenario, Outcome, RunSummary, ScenarioConfig};

use crate::output::fmt_sig;
use crate::{write_run, CliError};

pub const SWEEP_COLUMNS: [&str; 8] = [
    "pitch_deg",
    "outcome",
    "touchdown_pitch_deg",
    "touchdown_normal_speed_mps",
    "max_corridor_violation_m",
    "min_altitude_m",
    "final_time_s",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Pad pitch for this run, rad.
    pub pitch: f64,
    /// Per-run failures are kept as text so one bad pitch does not stop
    /// the rest of the sweep.
    pub result: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        let outcomes: Vec<_> = self.rows.iter().map(|r| r.result.as_ref().map(|s| s.outcome)).collect();
        if outcomes.iter().any(|o| o.is_err()) {
            1
        } else {
            crate::exit_code_for(outcomes.into_iter().flatten())
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = SWEEP_COLUMNS.join(",");
        out.push('\n');
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        for row in &self.rows {
            let pitch = fmt_sig(row.pitch.to_degrees());
            let line = match &row.result {
                Ok(s) => format!(
                    "{pitch},{},{},{},{},{},{},",
                    s.outcome.label(),
                    opt(s.touchdown_pitch.map(f64::to_degrees)),
                    opt(s.touchdown_normal_speed),
                    fmt_sig(s.max_corridor_violation),
                    fmt_sig(s.min_altitude),
                    fmt_sig(s.final_time),
                ),
                Err(e) => format!("{pitch},,,,,,,\"{}\"", e.replace('"', "'")),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn all_landed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| matches!(&r.result, Ok(s) if s.outcome == Outcome::Landed))
    }
}

/// Directory name for one sweep member, e.g. `pitch_25`.
pub fn run_dir_name(pitch: f64) -> String {
    format!("pitch_{}", fmt_sig(pitch.to_degrees()))
}

/// Runs `base` once per pad pitch (rad), in parallel, with the base seed
/// for every run. With `out` set, each run writes its files into its own
/// subdirectory and the table goes to `sweep.csv`.
pub fn run_sweep(base: &ScenarioConfig, pitches: &[f64], out: Option<&Path>) -> Result<SweepReport, CliError> {
    if pitches.is_empty() {
        return Err(CliError::EmptyPitchList);
    }
    let rows = pitches
        .par_iter()
        .map(|&pitch| {
            let cfg = ScenarioConfig {
                pad: slopeland::LandingPad {
                    pitch,
                    ..base.pad.clone()
                },
                ..base.clone()
            };
            let result = run_scenario(&cfg).map_err(CliError::from).and_then(|(log, summary)| {
                if let Some(dir) = out {
                    write_run(&dir.join(run_dir_name(pitch)), &log, &summary)?;
                }
                Ok(summary)
            });
            match &result {
                Ok(s) => log::info!("pitch {:.1} deg: {}", pitch.to_degrees(), s.outcome.label()),
                Err(e) => log::error!("pitch {:.1} deg: {e}", pitch.to_degrees()),
            }
            SweepRow {
                pitch,
                result: result.map_err(|e| e.to_string()),
            }
        })
        .collect();
    let report = SweepReport { rows };
    if let Some(dir) = out {
        crate::write_file(&dir.join("sweep.csv"), report.to_csv().as_bytes())?;
    }
    Ok(report)
}
