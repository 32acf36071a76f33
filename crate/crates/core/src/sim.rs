//! Closed-loop scenario execution.
//!
//! Each step runs sense, setpoint selection, control, phase transition and
//! integration, in that order, at a fixed `dt`. Samples are logged every
//! `log_interval`; phase changes are also recorded as events with the exact
//! state at which they fired.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::control::{controller_step, ControllerMemory, GainSet, Setpoint};
use crate::dynamics::{step_rk4, ActuatorCommand, VehicleParams, VehicleState, MAX_STEP};
use crate::error::{require, ConstraintViolation, DynamicsError, SimError};
use crate::sequencer::{
    apply_bond, phase_transition, setpoints_for_phase, Corridor, LandingPad, ManeuverConfig, ManeuverPhase, PhaseState,
};
use crate::so3::{rotation_exp, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Per-axis position noise, m.
    pub sigma_pos: f64,
    /// RMS magnitude of the attitude noise rotation, rad.
    pub sigma_att: f64,
    /// Per-axis velocity noise, m/s.
    pub sigma_vel: f64,
    /// Per-axis body rate noise, rad/s.
    pub sigma_rate: f64,
    pub seed: u64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            sigma_pos: 0.01,
            sigma_att: 0.01,
            sigma_vel: 0.0,
            sigma_rate: 0.0,
            seed: 1,
        }
    }
}

impl SensorModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_pos: 0.0,
            sigma_att: 0.0,
            sigma_vel: 0.0,
            sigma_rate: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        require(self.sigma_pos >= 0.0, "sensor.sigma_pos_m >= 0")?;
        require(self.sigma_att >= 0.0, "sensor.sigma_att_deg >= 0")?;
        require(self.sigma_vel >= 0.0, "sensor.sigma_vel_mps >= 0")?;
        require(self.sigma_rate >= 0.0, "sensor.sigma_rate_dps >= 0")
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: f64) -> Vec3 {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    Vec3::new(draw(), draw(), draw()) * sigma
}

/// Motion-capture measurement of the true state.
pub fn sense(s: &VehicleState, sm: &SensorModel, rng: &mut ChaCha8Rng) -> VehicleState {
    let mut out = *s;
    if sm.sigma_pos > 0.0 {
        out.position += gaussian3(rng, sm.sigma_pos);
    }
    if sm.sigma_att > 0.0 {
        let tilt = gaussian3(rng, sm.sigma_att / 3f64.sqrt());
        out.attitude = s.attitude.compose(&rotation_exp(&tilt));
    }
    if sm.sigma_vel > 0.0 {
        out.velocity += gaussian3(rng, sm.sigma_vel);
    }
    if sm.sigma_rate > 0.0 {
        out.body_rates += gaussian3(rng, sm.sigma_rate);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub vehicle: VehicleParams,
    pub gains: GainSet,
    pub pad: LandingPad,
    pub corridor: Corridor,
    pub maneuver: ManeuverConfig,
    pub sensor: SensorModel,
    /// Integration and control step, s.
    pub dt: f64,
    pub t_max: f64,
    /// Spacing of logged samples, s.
    pub log_interval: f64,
    /// Displacement of the physical pad from the pose the sequencer
    /// targets, m. Nonzero values model an unmeasured pad.
    pub pad_offset: Vec3,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            gains: GainSet::default(),
            pad: LandingPad::default(),
            corridor: Corridor::default(),
            maneuver: ManeuverConfig::default(),
            sensor: SensorModel::default(),
            dt: 0.005,
            t_max: 30.0,
            log_interval: 0.06,
            pad_offset: Vec3::zeros(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        self.vehicle.validate()?;
        self.gains.validate()?;
        self.pad.validate()?;
        self.corridor.validate()?;
        self.maneuver.validate(&self.pad)?;
        self.sensor.validate()?;
        require(self.dt > 0.0, "sim.dt_s > 0")?;
        require(self.dt <= MAX_STEP, "sim.dt_s <= 0.02")?;
        require(self.t_max > 0.0, "sim.t_max_s > 0")?;
        require(self.log_interval >= self.dt, "sim.log_interval_s >= sim.dt_s")
    }

    /// The pad as it physically sits.
    pub fn physical_pad(&self) -> LandingPad {
        LandingPad {
            center: self.pad.center + self.pad_offset,
            ..self.pad.clone()
        }
    }

    /// Integration steps between logged samples.
    pub fn log_stride(&self) -> u64 {
        ((self.log_interval / self.dt).round() as u64).max(1)
    }
}

/// The airframe as seen by the integrator. Once bonded, no command moves it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plant {
    Free(VehicleState),
    Bonded(VehicleState),
}

impl Plant {
    pub fn state(&self) -> &VehicleState {
        match self {
            Plant::Free(s) | Plant::Bonded(s) => s,
        }
    }

    pub fn step(&self, cmd: &ActuatorCommand, dt: f64, params: &VehicleParams) -> Result<Plant, DynamicsError> {
        match self {
            Plant::Free(s) => step_rk4(s, cmd, dt, params).map(Plant::Free),
            Plant::Bonded(s) => Ok(Plant::Bonded(*s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSample {
    pub t: f64,
    pub state: VehicleState,
    pub sensed: VehicleState,
    pub setpoint: Setpoint,
    pub command: ActuatorCommand,
    pub phase: ManeuverPhase,
    pub corridor_ok: bool,
    /// Distance outside the corridor, m.
    pub corridor_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub t: f64,
    pub from: ManeuverPhase,
    pub to: ManeuverPhase,
    /// True state at the instant the transition fired.
    pub state: VehicleState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Bonded,
    Recovered,
    GroundImpact,
    ControlFault(String),
    Timeout,
}

/// Decimated samples plus transition events. Sample times are strictly
/// increasing and spaced by the log interval, except that the terminal
/// sample is always appended.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub samples: Vec<LogSample>,
    pub events: Vec<PhaseEvent>,
    pub termination: Option<Termination>,
    /// Lowest altitude of any skid patch over every integration step, m.
    pub min_altitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Landed,
    AbortedRecovered,
    Crashed,
    Timeout,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Landed => "Landed",
            Outcome::AbortedRecovered => "Aborted+Recovered",
            Outcome::Crashed => "Crashed",
            Outcome::Timeout => "Timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub outcome: Outcome,
    /// Vehicle pitch at the bond instant, rad.
    pub touchdown_pitch: Option<f64>,
    /// Velocity component into the pad at the bond instant, m/s.
    pub touchdown_normal_speed: Option<f64>,
    pub max_corridor_violation: f64,
    pub min_altitude: f64,
    pub final_time: f64,
    pub timeline: Vec<(f64, ManeuverPhase)>,
    pub fault: Option<String>,
}

fn lowest_patch_altitude(s: &VehicleState, pad: &LandingPad) -> f64 {
    pad.skid_points()
        .iter()
        .map(|b| -(s.position + s.attitude.rotate(b)).z)
        .fold(f64::INFINITY, f64::min)
}

/// Runs one scenario to termination.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(TrajectoryLog, RunSummary), SimError> {
    cfg.validate()?;
    let stride = cfg.log_stride();
    let last_step = (cfg.t_max / cfg.dt).floor() as u64;
    let mut rng = cfg.sensor.rng();
    let physical_pad = cfg.physical_pad();
    let mut plant = Plant::Free(VehicleState::at_rest(cfg.maneuver.hover_start));
    let mut mem = ControllerMemory::reset(&cfg.vehicle);
    let mut phase = PhaseState::start();
    let mut log = TrajectoryLog {
        min_altitude: lowest_patch_altitude(plant.state(), &cfg.pad),
        ..Default::default()
    };

    let sample = |t: f64, state: &VehicleState, sensed: &VehicleState, sp: Setpoint, cmd: ActuatorCommand, phase| {
        let violation = cfg.corridor.violation(&state.position);
        LogSample {
            t,
            state: *state,
            sensed: *sensed,
            setpoint: sp,
            command: cmd,
            phase,
            corridor_ok: violation == 0.0,
            corridor_violation: violation,
        }
    };

    let mut step: u64 = 0;
    let termination = loop {
        let t = step as f64 * cfg.dt;
        let truth = *plant.state();
        let sensed = sense(&truth, &cfg.sensor, &mut rng);
        let (sp, mode) = setpoints_for_phase(phase.phase, &cfg.pad, &cfg.maneuver)
            .expect("terminal phases end the run before setpoints are requested");
        let (cmd, next_mem) = match controller_step(&sensed, &sp, mode, &mem, &cfg.vehicle, &cfg.gains, cfg.dt) {
            Ok(out) => out,
            Err(e) => {
                log.samples
                    .push(sample(t, &truth, &sensed, sp, ActuatorCommand::default(), phase.phase));
                break Termination::ControlFault(e.to_string());
            }
        };
        mem = next_mem;
        if step.is_multiple_of(stride) {
            log.samples.push(sample(t, &truth, &sensed, sp, cmd, phase.phase));
        }

        let next = phase_transition(phase, &truth, &physical_pad, &cfg.maneuver, t);
        if next.phase != phase.phase {
            log.events.push(PhaseEvent {
                t,
                from: phase.phase,
                to: next.phase,
                state: truth,
            });
        }
        phase = next;
        match phase.phase {
            ManeuverPhase::Bonded => {
                let frozen = apply_bond(&truth, &physical_pad).expect("bond follows a passed contact check");
                push_terminal(&mut log, sample(t, &frozen, &sensed, sp, cmd, phase.phase));
                break Termination::Bonded;
            }
            ManeuverPhase::Recovered => {
                push_terminal(&mut log, sample(t, &truth, &sensed, sp, cmd, phase.phase));
                break Termination::Recovered;
            }
            _ => {}
        }

        plant = plant.step(&cmd, cfg.dt, &cfg.vehicle)?;
        step += 1;
        let t_next = step as f64 * cfg.dt;
        let state = *plant.state();
        let lowest = lowest_patch_altitude(&state, &cfg.pad);
        log.min_altitude = log.min_altitude.min(lowest);
        if lowest <= 0.0 || !state.is_finite() {
            log.samples.push(sample(t_next, &state, &state, sp, cmd, phase.phase));
            break Termination::GroundImpact;
        }
        if step > last_step {
            log.samples.push(sample(t_next, &state, &state, sp, cmd, phase.phase));
            break Termination::Timeout;
        }
    };
    log.termination = Some(termination);
    let summary = summarize(&log, &physical_pad)?;
    Ok((log, summary))
}

fn push_terminal(log: &mut TrajectoryLog, s: LogSample) {
    match log.samples.last_mut() {
        Some(last) if last.t == s.t => *last = s,
        _ => log.samples.push(s),
    }
}

/// Classifies a finished run and extracts touchdown quantities.
pub fn summarize(log: &TrajectoryLog, pad: &LandingPad) -> Result<RunSummary, SimError> {
    let last = log.samples.last().ok_or(SimError::EmptyLog)?;
    let (outcome, fault) = match &log.termination {
        Some(Termination::Bonded) => (Outcome::Landed, None),
        Some(Termination::Recovered) => (Outcome::AbortedRecovered, None),
        Some(Termination::GroundImpact) => (Outcome::Crashed, None),
        Some(Termination::ControlFault(msg)) => (Outcome::Crashed, Some(msg.clone())),
        Some(Termination::Timeout) | None => match last.phase {
            ManeuverPhase::Bonded => (Outcome::Landed, None),
            ManeuverPhase::Recovered => (Outcome::AbortedRecovered, None),
            _ => (Outcome::Timeout, None),
        },
    };
    let touchdown = (outcome == Outcome::Landed)
        .then(|| log.events.iter().find(|e| e.to == ManeuverPhase::Bonded))
        .flatten()
        .map(|e| e.state)
        .or_else(|| (outcome == Outcome::Landed).then_some(last.state));
    Ok(RunSummary {
        outcome,
        touchdown_pitch: touchdown.map(|s| s.euler().pitch),
        touchdown_normal_speed: touchdown.map(|s| s.velocity.dot(&pad.inward_normal())),
        max_corridor_violation: log.samples.iter().map(|s| s.corridor_violation).fold(0.0, f64::max),
        min_altitude: log.min_altitude,
        final_time: last.t,
        timeline: log.events.iter().map(|e| (e.t, e.to)).collect(),
        fault,
    })
}
