//! Trajectory and summary file formats.
//!
//! CSV and JSON share one row schema. Numbers carry 9 significant digits.
//! Angles are in degrees, rates in deg/s, heights positive up, and
//! velocities inertial with z down.

use serde::{Deserialize, Serialize};
use slopeland::sim::LogSample;
use slopeland::{RunSummary, TrajectoryLog};

use crate::CliError;

pub const COLUMNS: [&str; 19] = [
    "t",
    "x",
    "y",
    "h",
    "vx",
    "vy",
    "vz",
    "roll_deg",
    "pitch_deg",
    "yaw_deg",
    "p",
    "q",
    "r",
    "d_coll",
    "d_pitch",
    "d_roll",
    "d_rud",
    "phase",
    "corridor_ok",
];

const SIG_DIGITS: usize = 9;

/// `%.9g`: fixed notation for moderate exponents, scientific otherwise,
/// trailing zeros dropped.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round_sig(v: f64) -> f64 {
    fmt_sig(v).parse().unwrap_or(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub d_coll: f64,
    pub d_pitch: f64,
    pub d_roll: f64,
    pub d_rud: f64,
    pub phase: String,
    pub corridor_ok: bool,
}

impl TrajectoryRow {
    /// Row for one log sample, already rounded to the emitted precision.
    pub fn from_sample(s: &LogSample) -> Self {
        let st = &s.state;
        let e = st.euler();
        let c = &s.command;
        Self {
            t: round_sig(s.t),
            x: round_sig(st.position.x),
            y: round_sig(st.position.y),
            h: round_sig(st.altitude()),
            vx: round_sig(st.velocity.x),
            vy: round_sig(st.velocity.y),
            vz: round_sig(st.velocity.z),
            roll_deg: round_sig(e.roll.to_degrees()),
            pitch_deg: round_sig(e.pitch.to_degrees()),
            yaw_deg: round_sig(e.yaw.to_degrees()),
            p: round_sig(st.body_rates.x.to_degrees()),
            q: round_sig(st.body_rates.y.to_degrees()),
            r: round_sig(st.body_rates.z.to_degrees()),
            d_coll: round_sig(c.collective),
            d_pitch: round_sig(c.pitch_cyclic),
            d_roll: round_sig(c.roll_cyclic),
            d_rud: round_sig(c.rudder),
            phase: s.phase.label().to_string(),
            corridor_ok: s.corridor_ok,
        }
    }

    fn numbers(&self) -> [f64; 17] {
        [
            self.t,
            self.x,
            self.y,
            self.h,
            self.vx,
            self.vy,
            self.vz,
            self.roll_deg,
            self.pitch_deg,
            self.yaw_deg,
            self.p,
            self.q,
            self.r,
            self.d_coll,
            self.d_pitch,
            self.d_roll,
            self.d_rud,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub columns: Vec<String>,
    pub samples: Vec<TrajectoryRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn rows(log: &TrajectoryLog) -> Result<Vec<TrajectoryRow>, CliError> {
    if log.samples.is_empty() {
        return Err(CliError::EmptyLog);
    }
    Ok(log.samples.iter().map(TrajectoryRow::from_sample).collect())
}

pub fn emit_trajectory(log: &TrajectoryLog, format: Format) -> Result<Vec<u8>, CliError> {
    let rows = rows(log)?;
    match format {
        Format::Csv => {
            let mut out = COLUMNS.join(",");
            out.push('\n');
            for row in &rows {
                for v in row.numbers() {
                    out.push_str(&fmt_sig(v));
                    out.push(',');
                }
                out.push_str(&row.phase);
                out.push(',');
                out.push_str(if row.corridor_ok { "1" } else { "0" });
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        Format::Json => {
            let doc = TrajectoryDocument {
                columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
                samples: rows,
            };
            let mut bytes = serde_json::to_vec_pretty(&doc)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub t: f64,
    pub phase: String,
}

/// `summary.json` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryDocument {
    pub outcome: String,
    pub touchdown_pitch_deg: Option<f64>,
    pub touchdown_normal_speed_mps: Option<f64>,
    pub max_corridor_violation_m: f64,
    pub min_altitude_m: f64,
    pub final_time_s: f64,
    pub timeline: Vec<TimelineEntry>,
    pub fault: Option<String>,
}

impl From<&RunSummary> for SummaryDocument {
    fn from(s: &RunSummary) -> Self {
        Self {
            outcome: s.outcome.label().to_string(),
            touchdown_pitch_deg: s.touchdown_pitch.map(|p| round_sig(p.to_degrees())),
            touchdown_normal_speed_mps: s.touchdown_normal_speed.map(round_sig),
            max_corridor_violation_m: round_sig(s.max_corridor_violation),
            min_altitude_m: round_sig(s.min_altitude),
            final_time_s: round_sig(s.final_time),
            timeline: s
                .timeline
                .iter()
                .map(|(t, p)| TimelineEntry {
                    t: round_sig(*t),
                    phase: p.label().to_string(),
                })
                .collect(),
            fault: s.fault.clone(),
        }
    }
}

pub fn emit_summary(s: &RunSummary) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(&SummaryDocument::from(s))?;
    bytes.push(b'\n');
    Ok(bytes)
}
