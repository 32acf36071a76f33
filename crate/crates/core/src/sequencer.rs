//! Landing maneuver automaton.
//!
//! ```text
//! Hover --start--> Approach --x > x_switch--> Flare --contact--> Bonded
//!                                               |
//!                                               +--T_abort--> Abort --settled--> Recovered
//! ```
//!
//! The abort is scheduled unconditionally at flare entry. Once the skids
//! touch the pad the Velcro bond freezes the vehicle, so the abort commands
//! that follow have no effect.

use serde::{Deserialize, Serialize};

use crate::control::{ControlMode, LateralSource, PitchSource, Setpoint};
use crate::dynamics::VehicleState;
use crate::error::{require, ConstraintViolation, SequencerError};
use crate::so3::{attitude_distance, RotationMatrix, Vec3};

/// Radius around the abort waypoint that counts as recovered, m.
pub const RECOVERY_RADIUS: f64 = 0.2;
/// Speed below which the vehicle counts as hovering, m/s.
pub const RECOVERY_SPEED: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandingPad {
    /// Pad center, inertial, m.
    pub center: Vec3,
    /// Pitch of the pad about the inertial y axis, rad. The surface rises
    /// along +x, facing a vehicle approaching from -x.
    pub pitch: f64,
    /// Side of the square pad, m.
    pub side: f64,
    /// Skid-to-surface distance at which the Velcro grabs, m.
    pub bond_distance: f64,
    /// Largest vehicle-to-pad attitude difference that still bonds, rad.
    pub bond_attitude_tol: f64,
    /// Body-frame Velcro patch offsets (half-spacing along x, half-spacing
    /// along y, depth below the center of mass), m.
    pub skid_offset: Vec3,
}

impl Default for LandingPad {
    fn default() -> Self {
        Self {
            center: Vec3::new(4.5, 0.0, -1.0),
            pitch: 10f64.to_radians(),
            side: 1.2,
            bond_distance: 0.02,
            bond_attitude_tol: 15f64.to_radians(),
            skid_offset: Vec3::new(0.10, 0.15, 0.12),
        }
    }
}

impl LandingPad {
    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        require(
            (0.0..=70f64.to_radians() + 1e-12).contains(&self.pitch),
            "0 <= pad.pitch_deg <= 70",
        )?;
        require(self.side > 0.0, "pad.side_m > 0")?;
        require(self.bond_distance > 0.0, "pad.bond_distance_m > 0")?;
        require(self.bond_attitude_tol > 0.0, "pad.bond_attitude_tol_deg > 0")?;
        require(self.skid_offset.z >= 0.0, "pad.skid_depth_m >= 0")
    }

    /// Pad orientation: its local z axis points into the surface.
    pub fn frame(&self) -> RotationMatrix {
        RotationMatrix::about_y(self.pitch)
    }

    /// Unit normal pointing into the pad.
    pub fn inward_normal(&self) -> Vec3 {
        self.frame().rotate(&Vec3::z())
    }

    /// The four patch positions in the body frame.
    pub fn skid_points(&self) -> [Vec3; 4] {
        let o = self.skid_offset;
        [
            Vec3::new(o.x, o.y, o.z),
            Vec3::new(o.x, -o.y, o.z),
            Vec3::new(-o.x, o.y, o.z),
            Vec3::new(-o.x, -o.y, o.z),
        ]
    }

    /// Pad-frame coordinates of an inertial point. Negative local z is on
    /// the approach side of the surface.
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        self.frame().transpose().rotate(&(p - self.center))
    }

    /// Where the center of mass sits when the vehicle rests on the pad
    /// center with matching attitude.
    pub fn resting_position(&self) -> Vec3 {
        self.center - self.inward_normal() * self.skid_offset.z
    }
}

/// Velcro engages when every patch is within `bond_distance` of the surface
/// and over the plywood, and the vehicle is roughly aligned with the pad.
pub fn contact_check(s: &VehicleState, pad: &LandingPad) -> bool {
    let half = 0.5 * pad.side;
    let patches_on_pad = pad.skid_points().iter().all(|b| {
        let local = pad.to_local(&(s.position + s.attitude.rotate(b)));
        local.z.abs() <= pad.bond_distance && local.x.abs() <= half && local.y.abs() <= half
    });
    patches_on_pad
        && attitude_distance(&pad.frame(), &s.attitude)
            .map(|angle| angle < pad.bond_attitude_tol)
            .unwrap_or(false)
}

/// Freezes the vehicle onto the pad. Velocity and rates become zero.
pub fn apply_bond(s: &VehicleState, pad: &LandingPad) -> Result<VehicleState, SequencerError> {
    if !contact_check(s, pad) {
        return Err(SequencerError::NotInContact);
    }
    Ok(VehicleState {
        velocity: Vec3::zeros(),
        body_rates: Vec3::zeros(),
        ..*s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    /// Center of the corridor entrance (x, y), m. Ground level is z = 0.
    pub origin_x: f64,
    pub origin_y: f64,
    /// Along-track depth (+x), m.
    pub depth: f64,
    pub width_start: f64,
    pub width_end: f64,
    /// Ceiling above ground, m.
    pub height: f64,
}

impl Default for Corridor {
    fn default() -> Self {
        Self {
            origin_x: -0.5,
            origin_y: 0.0,
            depth: 6.0,
            width_start: 1.0,
            width_end: 3.0,
            height: 3.0,
        }
    }
}

impl Corridor {
    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        require(self.depth > 0.0, "corridor.depth_m > 0")?;
        require(self.width_start > 0.0, "corridor.width_start_m > 0")?;
        require(self.width_end > 0.0, "corridor.width_end_m > 0")?;
        require(self.height > 0.0, "corridor.height_m > 0")
    }

    /// How far outside the corridor a position lies, m; zero inside.
    pub fn violation(&self, p: &Vec3) -> f64 {
        let along = p.x - self.origin_x;
        let frac = (along / self.depth).clamp(0.0, 1.0);
        let half_width = 0.5 * (self.width_start + frac * (self.width_end - self.width_start));
        let h = -p.z;
        let excess = [
            -along,
            along - self.depth,
            (p.y - self.origin_y).abs() - half_width,
            -h,
            h - self.height,
        ];
        excess.into_iter().fold(0.0, f64::max)
    }
}

pub fn corridor_check(s: &VehicleState, c: &Corridor) -> bool {
    c.violation(&s.position) == 0.0
}

/// Gravity used to predict the flare stopping distance, m/s^2.
const FLARE_GRAVITY: f64 = 9.81;
/// Cap on the predicted flare stopping distance, m. Shallow pads barely
/// decelerate the vehicle, so the prediction grows without bound.
pub const MAX_STOPPING_LEAD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverConfig {
    /// Hover position before the maneuver starts, m.
    pub hover_start: Vec3,
    /// Time spent in hover before the operator start, s.
    pub start_delay: f64,
    /// Along-track position that triggers the flare, m. `None` places it
    /// ahead of the pad by the predicted flare stopping distance plus
    /// `switch_margin`.
    pub x_switch: Option<f64>,
    /// Distance covered while the pitch-up builds, m.
    pub switch_margin: f64,
    /// Forward speed commanded during the approach, m/s.
    pub approach_speed: f64,
    /// Altitude held during the approach, m. `None` flies at the resting
    /// altitude over the pad center plus `approach_clearance`.
    pub approach_altitude: Option<f64>,
    pub approach_clearance: f64,
    /// Pitch held during the flare, rad. Defaults to the pad pitch.
    pub flare_pitch: Option<f64>,
    /// How far below the resting altitude the flare aims, m. A positive
    /// value keeps the vehicle pressing onto the pad.
    pub flare_sink: f64,
    /// Time after flare entry at which the abort fires, s.
    pub t_abort: f64,
    /// Where the abort climbs back to, m.
    pub abort_waypoint: Vec3,
}

impl Default for ManeuverConfig {
    fn default() -> Self {
        let hover_start = Vec3::new(0.0, 0.0, -1.5);
        Self {
            hover_start,
            start_delay: 1.0,
            x_switch: None,
            switch_margin: 0.25,
            approach_speed: 1.0,
            approach_altitude: None,
            approach_clearance: 0.05,
            flare_pitch: None,
            flare_sink: 0.15,
            t_abort: 1.0,
            abort_waypoint: hover_start,
        }
    }
}

impl ManeuverConfig {
    pub fn validate(&self, pad: &LandingPad) -> Result<(), ConstraintViolation> {
        let x_switch = self.switch_x(pad);
        require(
            self.hover_start.x < x_switch && x_switch < pad.center.x,
            "hover start x < maneuver.x_switch_m < pad x",
        )?;
        require(self.switch_margin >= 0.0, "maneuver.switch_margin_m >= 0")?;
        require(self.t_abort > 0.0, "maneuver.t_abort_s > 0")?;
        require(self.start_delay >= 0.0, "maneuver.start_delay_s >= 0")?;
        require(self.approach_speed > 0.0, "maneuver.approach_speed_mps > 0")?;
        require(self.approach_alt(pad) > 0.0, "maneuver.approach_altitude_m > 0")
    }

    /// Flare trigger position. Pitched to `β` and holding altitude, the
    /// vehicle decelerates at about `g·tan β`.
    pub fn switch_x(&self, pad: &LandingPad) -> f64 {
        self.x_switch.unwrap_or_else(|| {
            let v = self.approach_speed;
            let stopping = (v * v / (2.0 * FLARE_GRAVITY * pad.pitch.tan())).min(MAX_STOPPING_LEAD);
            pad.center.x - stopping - self.switch_margin
        })
    }

    pub fn approach_alt(&self, pad: &LandingPad) -> f64 {
        self.approach_altitude
            .unwrap_or_else(|| -pad.resting_position().z + self.approach_clearance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManeuverPhase {
    Hover,
    Approach,
    Flare,
    Bonded,
    Abort,
    Recovered,
}

impl ManeuverPhase {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Hover => "Hover",
            Self::Approach => "Approach",
            Self::Flare => "Flare",
            Self::Bonded => "Bonded",
            Self::Abort => "Abort",
            Self::Recovered => "Recovered",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        [
            Self::Hover,
            Self::Approach,
            Self::Flare,
            Self::Bonded,
            Self::Abort,
            Self::Recovered,
        ]
        .into_iter()
        .find(|p| p.label() == label)
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Self::Bonded | Self::Recovered)
    }

    /// Edges of the automaton (self-loops excluded).
    pub fn can_transition_to(&self, next: ManeuverPhase) -> bool {
        use ManeuverPhase::*;
        matches!(
            (self, next),
            (Hover, Approach) | (Approach, Flare) | (Flare, Bonded) | (Flare, Abort) | (Abort, Recovered)
        )
    }
}

impl std::fmt::Display for ManeuverPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A phase and the time it was entered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub phase: ManeuverPhase,
    pub entered_at: f64,
}

impl PhaseState {
    pub fn start() -> Self {
        Self {
            phase: ManeuverPhase::Hover,
            entered_at: 0.0,
        }
    }

    pub fn enter(phase: ManeuverPhase, t: f64) -> Self {
        Self { phase, entered_at: t }
    }
}

/// Total transition function of the automaton.
pub fn phase_transition(
    current: PhaseState,
    s: &VehicleState,
    pad: &LandingPad,
    cfg: &ManeuverConfig,
    t: f64,
) -> PhaseState {
    use ManeuverPhase::*;
    match current.phase {
        Hover if t >= cfg.start_delay => PhaseState::enter(Approach, t),
        Approach if s.position.x > cfg.switch_x(pad) => PhaseState::enter(Flare, t),
        Flare if contact_check(s, pad) => PhaseState::enter(Bonded, t),
        Flare if t - current.entered_at >= cfg.t_abort => PhaseState::enter(Abort, t),
        Abort if (s.position - cfg.abort_waypoint).norm() < RECOVERY_RADIUS && s.velocity.norm() < RECOVERY_SPEED => {
            PhaseState::enter(Recovered, t)
        }
        _ => current,
    }
}

/// Setpoint and loop configuration for a phase. Pad targeting is open loop:
/// only the configured pad pose is used.
pub fn setpoints_for_phase(
    phase: ManeuverPhase,
    pad: &LandingPad,
    cfg: &ManeuverConfig,
) -> Result<(Setpoint, ControlMode), SequencerError> {
    let approach = ControlMode {
        lateral_source: LateralSource::DirectVelocity,
        pitch_source: PitchSource::VelocityLoop,
    };
    match phase {
        ManeuverPhase::Hover => Ok((Setpoint::position(cfg.hover_start, 0.0), ControlMode::POSITION)),
        ManeuverPhase::Approach => Ok((
            Setpoint {
                x: pad.center.x,
                y: pad.center.y,
                z: -cfg.approach_alt(pad),
                yaw: 0.0,
                v_x: Some(cfg.approach_speed),
                pitch: None,
            },
            approach,
        )),
        ManeuverPhase::Flare => {
            let rest = pad.resting_position();
            Ok((
                Setpoint {
                    x: rest.x,
                    y: rest.y,
                    z: rest.z + cfg.flare_sink,
                    yaw: 0.0,
                    v_x: Some(cfg.approach_speed),
                    pitch: Some(cfg.flare_pitch.unwrap_or(pad.pitch)),
                },
                ControlMode {
                    pitch_source: PitchSource::DirectPitch,
                    ..approach
                },
            ))
        }
        ManeuverPhase::Abort | ManeuverPhase::Recovered => {
            Ok((Setpoint::position(cfg.abort_waypoint, 0.0), ControlMode::POSITION))
        }
        ManeuverPhase::Bonded => Err(SequencerError::TerminalPhase),
    }
}
