//! Cascaded flight controller.
//!
//! Three loops run in series: a saturated proportional position law produces
//! inertial velocity commands, the velocity loop inverts the planar dynamics
//! to obtain pitch/roll commands that impose a second-order velocity
//! response with integral action, and the attitude loop deflects the cyclics
//! and rudder in proportion to `log(R_cmd^T R)`. The collective closes the
//! vertical velocity loop by inverting the vertical dynamics.
//!
//! Every tracking error is `command - actual`, integrators included.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ActuatorCommand, VehicleParams, VehicleState};
use crate::error::{require, ConstraintViolation, ControlError};
use crate::so3::{attitude_error, euler_to_rotation, inertial_to_body_planar, EulerAngles, RotationMatrix, Vec3};

/// Below this collective thrust (N) the planar inversion is refused.
pub const MIN_INVERSION_THRUST: f64 = 0.5;

/// Below this value of cos(pitch)cos(roll) the collective law is refused.
pub const MIN_VERTICAL_AUTHORITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    /// Velocity command saturation, m/s.
    pub v_max: f64,
    pub lambda_p: f64,
    pub lambda_z: f64,
    pub lambda_u: f64,
    pub lambda_v: f64,
    pub k_iu: f64,
    pub k_iv: f64,
    pub lambda_vz: f64,
    pub k_ivz: f64,
    pub k_phi: f64,
    pub k_theta: f64,
    pub k_psi: f64,
    /// Time constant of the direct-pitch low-pass, s.
    pub pitch_filter_tau: f64,
    /// Clamp on pitch and roll commands, rad.
    pub tilt_max: f64,
}

impl Default for GainSet {
    fn default() -> Self {
        Self {
            v_max: 1.5,
            lambda_p: 1.2,
            lambda_z: 1.2,
            lambda_u: 2.0,
            lambda_v: 2.0,
            k_iu: 0.5,
            k_iv: 0.5,
            lambda_vz: 3.0,
            k_ivz: 0.8,
            k_phi: 1.5,
            k_theta: 1.5,
            k_psi: 2.0,
            pitch_filter_tau: 0.08,
            tilt_max: 75f64.to_radians(),
        }
    }
}

impl GainSet {
    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        let positive = [
            (self.v_max, "gains.v_max > 0"),
            (self.lambda_p, "gains.lambda_p > 0"),
            (self.lambda_z, "gains.lambda_z > 0"),
            (self.lambda_u, "gains.lambda_u > 0"),
            (self.lambda_v, "gains.lambda_v > 0"),
            (self.k_iu, "gains.k_iu > 0"),
            (self.k_iv, "gains.k_iv > 0"),
            (self.lambda_vz, "gains.lambda_vz > 0"),
            (self.k_ivz, "gains.k_ivz > 0"),
            (self.k_phi, "gains.k_phi > 0"),
            (self.k_theta, "gains.k_theta > 0"),
            (self.k_psi, "gains.k_psi > 0"),
            (self.pitch_filter_tau, "gains.pitch_filter_tau_s > 0"),
            (self.tilt_max, "gains.tilt_max_deg > 0"),
        ];
        for (value, name) in positive {
            require(value > 0.0 && value.is_finite(), name)?;
        }
        require(self.tilt_max < std::f64::consts::FRAC_PI_2, "gains.tilt_max_deg < 90")
    }

    /// The same gains with every loop gain multiplied by `c`.
    pub fn scaled_attitude(&self, c: f64) -> Self {
        Self {
            k_phi: self.k_phi * c,
            k_theta: self.k_theta * c,
            k_psi: self.k_psi * c,
            ..self.clone()
        }
    }
}

/// Integrator and filter states carried between controller steps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerMemory {
    pub i_u: f64,
    pub i_v: f64,
    pub i_vz: f64,
    /// Low-pass state of the direct pitch command, rad.
    pub pitch_filtered: f64,
    /// Collective thrust commanded on the previous step, N.
    pub thrust_prev: f64,
}

impl ControllerMemory {
    /// Zero integrators, previous thrust at hover.
    pub fn reset(params: &VehicleParams) -> Self {
        Self {
            thrust_prev: params.weight(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LateralSource {
    Position,
    DirectVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PitchSource {
    VelocityLoop,
    DirectPitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlMode {
    pub lateral_source: LateralSource,
    pub pitch_source: PitchSource,
}

impl ControlMode {
    pub const POSITION: Self = Self {
        lateral_source: LateralSource::Position,
        pitch_source: PitchSource::VelocityLoop,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub v_x: Option<f64>,
    pub pitch: Option<f64>,
}

impl Setpoint {
    pub fn position(p: Vec3, yaw: f64) -> Self {
        Self {
            x: p.x,
            y: p.y,
            z: p.z,
            yaw,
            v_x: None,
            pitch: None,
        }
    }
}

/// The usual saturation: identity on [-1, 1], clamped outside.
pub fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Saturated proportional position law; returns inertial velocity commands.
pub fn position_loop(s: &VehicleState, sp: &Setpoint, gains: &GainSet) -> (f64, f64, f64) {
    let law = |err: f64, lambda: f64| -gains.v_max * sat(lambda * err / gains.v_max);
    (
        law(s.position.x - sp.x, gains.lambda_p),
        law(s.position.y - sp.y, gains.lambda_p),
        law(s.position.z - sp.z, gains.lambda_z),
    )
}

/// Pitch and roll that make the planar dynamics follow the desired
/// second-order velocity response, before any clamping.
#[allow(clippy::too_many_arguments)]
pub fn invert_planar(
    (u, v): (f64, f64),
    (u_cmd, v_cmd): (f64, f64),
    (i_u, i_v): (f64, f64),
    thrust: f64,
    params: &VehicleParams,
    gains: &GainSet,
) -> Result<(f64, f64), ControlError> {
    if thrust.is_nan() || thrust <= MIN_INVERSION_THRUST {
        return Err(ControlError::ThrustTooLow { thrust });
    }
    let m = params.mass;
    let pitch = -(gains.lambda_u * m * (i_u + u_cmd - u) + params.k_du * u * u.abs()) / thrust;
    let roll = (gains.lambda_v * m * (i_v + v_cmd - v) + params.k_dv * v * v.abs()) / thrust;
    Ok((pitch, roll))
}

/// Velocity loop with integral action. Each integrator freezes while its
/// output is clamped at `tilt_max`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_loop(
    body_vel: (f64, f64),
    body_cmd: (f64, f64),
    mem: &ControllerMemory,
    thrust: f64,
    params: &VehicleParams,
    gains: &GainSet,
    dt: f64,
) -> Result<(f64, f64, ControllerMemory), ControlError> {
    let (u, v) = body_vel;
    let (u_cmd, v_cmd) = body_cmd;
    let (pitch, roll) = invert_planar(body_vel, body_cmd, (mem.i_u, mem.i_v), thrust, params, gains)?;
    let pitch_clamped = pitch.clamp(-gains.tilt_max, gains.tilt_max);
    let roll_clamped = roll.clamp(-gains.tilt_max, gains.tilt_max);
    let mut next = *mem;
    if pitch_clamped == pitch {
        next.i_u += gains.k_iu * (u_cmd - u) * dt;
    }
    if roll_clamped == roll {
        next.i_v += gains.k_iv * (v_cmd - v) * dt;
    }
    Ok((pitch_clamped, roll_clamped, next))
}

/// First-order low-pass on the direct pitch command, discretized exactly.
pub fn direct_pitch_filter(
    pitch_desired: f64,
    mem: &ControllerMemory,
    gains: &GainSet,
    dt: f64,
) -> (f64, ControllerMemory) {
    let alpha = 1.0 - (-dt / gains.pitch_filter_tau).exp();
    let filtered = mem.pitch_filtered + alpha * (pitch_desired - mem.pitch_filtered);
    let next = ControllerMemory {
        pitch_filtered: filtered,
        ..*mem
    };
    (filtered, next)
}

/// Unclamped attitude law: (roll cyclic, pitch cyclic, rudder).
pub fn attitude_law(
    r: &RotationMatrix,
    pitch_cmd: f64,
    roll_cmd: f64,
    yaw_cmd: f64,
    gains: &GainSet,
) -> Result<(f64, f64, f64), ControlError> {
    let r_cmd = euler_to_rotation(EulerAngles::new(roll_cmd, pitch_cmd, yaw_cmd));
    let eps = attitude_error(&r_cmd, r)?;
    Ok((gains.k_phi * eps.x, gains.k_theta * eps.y, gains.k_psi * eps.z))
}

/// Attitude law clamped to the [-1, 1] deflection range.
pub fn attitude_loop(
    r: &RotationMatrix,
    pitch_cmd: f64,
    roll_cmd: f64,
    yaw_cmd: f64,
    gains: &GainSet,
) -> Result<(f64, f64, f64), ControlError> {
    let (roll, pitch, rud) = attitude_law(r, pitch_cmd, roll_cmd, yaw_cmd, gains)?;
    Ok((sat(roll), sat(pitch), sat(rud)))
}

/// Collective law from inverting the vertical dynamics, clamped to [0, 1].
#[allow(clippy::too_many_arguments)]
pub fn collective_loop(
    v_z: f64,
    v_z_cmd: f64,
    pitch: f64,
    roll: f64,
    mem: &ControllerMemory,
    params: &VehicleParams,
    gains: &GainSet,
    dt: f64,
) -> Result<(f64, ControllerMemory), ControlError> {
    let cos_product = pitch.cos() * roll.cos();
    if cos_product.is_nan() || cos_product <= MIN_VERTICAL_AUTHORITY {
        return Err(ControlError::AttitudeTooSteep { cos_product });
    }
    let m = params.mass;
    let raw = (params.weight() - gains.lambda_vz * m * (mem.i_vz + v_z_cmd - v_z) - params.k_zdot * v_z)
        / (params.k_coll * cos_product);
    let clamped = raw.clamp(0.0, 1.0);
    let mut next = *mem;
    if clamped == raw {
        next.i_vz += gains.k_ivz * (v_z_cmd - v_z) * dt;
    }
    Ok((clamped, next))
}

/// Floor on the thrust handed to the planar inversion, as a fraction of
/// weight. Keeps the cyclic commands bounded after the collective bottoms out.
pub const INVERSION_THRUST_FLOOR: f64 = 0.1;

/// One full pass through the cascade.
#[allow(clippy::too_many_arguments)]
pub fn controller_step(
    s: &VehicleState,
    sp: &Setpoint,
    mode: ControlMode,
    mem: &ControllerMemory,
    params: &VehicleParams,
    gains: &GainSet,
    dt: f64,
) -> Result<(ActuatorCommand, ControllerMemory), ControlError> {
    let e = s.euler();
    let (vx_pos, vy_cmd, vz_cmd) = position_loop(s, sp, gains);
    let vx_cmd = match mode.lateral_source {
        LateralSource::Position => vx_pos,
        LateralSource::DirectVelocity => sp.v_x.ok_or(ControlError::MissingSetpoint("v_x"))?,
    };
    let body_cmd = inertial_to_body_planar(vx_cmd, vy_cmd, e.yaw);
    let body_vel = inertial_to_body_planar(s.velocity.x, s.velocity.y, e.yaw);
    let thrust = mem.thrust_prev.max(INVERSION_THRUST_FLOOR * params.weight());
    let (vel_pitch, roll_cmd, mut next) = velocity_loop(body_vel, body_cmd, mem, thrust, params, gains, dt)?;

    let pitch_cmd = match mode.pitch_source {
        PitchSource::VelocityLoop => {
            // keep the filter aligned so a later switch to direct pitch is bumpless
            next.pitch_filtered = vel_pitch;
            vel_pitch
        }
        PitchSource::DirectPitch => {
            let desired = sp.pitch.ok_or(ControlError::MissingSetpoint("pitch"))?;
            next.i_u = mem.i_u;
            let (filtered, m) = direct_pitch_filter(desired, &next, gains, dt);
            next = m;
            filtered
        }
    };

    let (roll_cyc, pitch_cyc, rudder) = attitude_loop(&s.attitude, pitch_cmd, roll_cmd, sp.yaw, gains)?;
    let (collective, next) = collective_loop(s.velocity.z, vz_cmd, e.pitch, e.roll, &next, params, gains, dt)?;
    let next = ControllerMemory {
        thrust_prev: params.thrust(collective),
        ..next
    };
    Ok((
        ActuatorCommand {
            collective,
            pitch_cyclic: pitch_cyc,
            roll_cyclic: roll_cyc,
            rudder,
        },
        next,
    ))
}
