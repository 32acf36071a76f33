//! Simplified helicopter plant.
//!
//! Translational motion uses the planar body-axis model (thrust times
//! pitch/roll angle plus quadratic drag) and a vertical model driven by the
//! projected collective thrust. Body rates follow each cyclic/rudder
//! deflection through a first-order lag, and the attitude integrates
//! `R' = R hat(w)`.
//!
//! Frames: inertial x forward, y right, z down. Altitude is `-z`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{require, ConstraintViolation, DynamicsError};
use crate::so3::{
    body_to_inertial_planar, euler_unchecked, hat, inertial_to_body_planar, EulerAngles, RotationMatrix, Vec3,
};

/// Largest accepted integration step (s).
pub const MAX_STEP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// Planar drag coefficients, kg/m.
    pub k_du: f64,
    pub k_dv: f64,
    /// Vertical drag coefficient, kg/s.
    pub k_zdot: f64,
    /// Collective-to-thrust gain, N per unit deflection.
    pub k_coll: f64,
    pub gravity: f64,
    /// Rate-response time constants (roll, pitch, yaw), s.
    pub tau_att: Vec3,
    /// Deflection-to-rate gains (roll, pitch, yaw), rad/s per unit deflection.
    ///
    /// Negative by default: the attitude law deflects in the direction of
    /// `log(R_cmd^T R)`, so a positive deflection must produce a rate that
    /// shrinks that error.
    pub k_act: Vec3,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            mass: 1.3,
            k_du: 0.05,
            k_dv: 0.05,
            k_zdot: 0.10,
            k_coll: 25.0,
            gravity: 9.81,
            tau_att: Vec3::repeat(0.10),
            k_act: Vec3::repeat(-8.0),
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), ConstraintViolation> {
        require(self.mass > 0.0, "vehicle.mass_kg > 0")?;
        require(self.k_coll > 0.0, "vehicle.k_coll > 0")?;
        require(self.gravity > 0.0, "vehicle.gravity > 0")?;
        require(self.k_du >= 0.0, "vehicle.k_du >= 0")?;
        require(self.k_dv >= 0.0, "vehicle.k_dv >= 0")?;
        require(self.k_zdot >= 0.0, "vehicle.k_zdot >= 0")?;
        require(self.tau_att.iter().all(|t| *t > 0.0), "vehicle.tau_att > 0")?;
        require(self.k_act.iter().all(|k| k.is_finite()), "vehicle.k_act finite")?;
        Ok(())
    }

    /// Weight, N.
    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Collective deflection that balances weight in level flight.
    pub fn hover_collective(&self) -> f64 {
        self.weight() / self.k_coll
    }

    pub fn thrust(&self, collective: f64) -> f64 {
        self.k_coll * collective.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Inertial position, m (z down).
    pub position: Vec3,
    /// Inertial velocity, m/s.
    pub velocity: Vec3,
    /// Body-to-inertial attitude.
    pub attitude: RotationMatrix,
    /// Body rates (p, q, r), rad/s.
    pub body_rates: Vec3,
}

impl VehicleState {
    /// At rest, level, at the given position.
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            ..Self::default()
        }
    }

    pub fn altitude(&self) -> f64 {
        -self.position.z
    }

    /// Euler angles; finite even at gimbal lock.
    pub fn euler(&self) -> EulerAngles {
        euler_unchecked(&self.attitude)
    }

    /// Body-frame planar velocities (u, v).
    pub fn planar_body_velocity(&self) -> (f64, f64) {
        inertial_to_body_planar(self.velocity.x, self.velocity.y, self.euler().yaw)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.attitude.matrix().iter().all(|v| v.is_finite())
            && self.body_rates.iter().all(|v| v.is_finite())
    }
}

/// Normalized actuator deflections.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub collective: f64,
    pub pitch_cyclic: f64,
    pub roll_cyclic: f64,
    pub rudder: f64,
}

impl ActuatorCommand {
    /// Collective into [0, 1], the rest into [-1, 1].
    pub fn clamped(self) -> Self {
        Self {
            collective: self.collective.clamp(0.0, 1.0),
            pitch_cyclic: self.pitch_cyclic.clamp(-1.0, 1.0),
            roll_cyclic: self.roll_cyclic.clamp(-1.0, 1.0),
            rudder: self.rudder.clamp(-1.0, 1.0),
        }
    }

    /// Deflections ordered as body axes (roll, pitch, yaw).
    pub fn rate_inputs(&self) -> Vec3 {
        Vec3::new(self.roll_cyclic, self.pitch_cyclic, self.rudder)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleStateDerivative {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: Matrix3<f64>,
    pub body_rates: Vec3,
}

/// Body-axis planar accelerations (du/dt, dv/dt).
///
/// Drag is applied as `-k |u| u` so it always opposes motion.
pub fn planar_body_accel(u: f64, v: f64, thrust: f64, pitch: f64, roll: f64, params: &VehicleParams) -> (f64, f64) {
    let du = (-thrust * pitch - params.k_du * u.abs() * u) / params.mass;
    let dv = (thrust * roll - params.k_dv * v.abs() * v) / params.mass;
    (du, dv)
}

/// Vertical acceleration (z down).
pub fn vertical_accel(v_z: f64, thrust: f64, pitch: f64, roll: f64, params: &VehicleParams) -> f64 {
    (-thrust * pitch.cos() * roll.cos() + params.weight() - params.k_zdot * v_z) / params.mass
}

/// First-order tracking of `k_act * deflection` per body axis.
pub fn attitude_rate_response(rates: &Vec3, cmd: &ActuatorCommand, params: &VehicleParams) -> Vec3 {
    let target = params.k_act.component_mul(&cmd.rate_inputs());
    (target - rates).component_div(&params.tau_att)
}

pub fn state_derivative(s: &VehicleState, cmd: &ActuatorCommand, params: &VehicleParams) -> VehicleStateDerivative {
    let e = s.euler();
    let thrust = params.thrust(cmd.collective);
    let (u, v) = inertial_to_body_planar(s.velocity.x, s.velocity.y, e.yaw);
    let (du, dv) = planar_body_accel(u, v, thrust, e.pitch, e.roll, params);
    let (ax, ay) = body_to_inertial_planar(du, dv, e.yaw);
    let az = vertical_accel(s.velocity.z, thrust, e.pitch, e.roll, params);
    VehicleStateDerivative {
        position: s.velocity,
        velocity: Vec3::new(ax, ay, az),
        attitude: s.attitude.matrix() * hat(&s.body_rates),
        body_rates: attitude_rate_response(&s.body_rates, cmd, params),
    }
}

fn advance(s: &VehicleState, d: &VehicleStateDerivative, h: f64) -> VehicleState {
    VehicleState {
        position: s.position + d.position * h,
        velocity: s.velocity + d.velocity * h,
        attitude: RotationMatrix::from_matrix_unchecked(s.attitude.matrix() + d.attitude * h),
        body_rates: s.body_rates + d.body_rates * h,
    }
}

/// One classical Runge-Kutta step with the command held constant.
/// The attitude is projected back onto the rotation group afterwards.
pub fn step_rk4(
    s: &VehicleState,
    cmd: &ActuatorCommand,
    dt: f64,
    params: &VehicleParams,
) -> Result<VehicleState, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidStep { dt });
    }
    if dt > MAX_STEP {
        return Err(DynamicsError::StepTooLarge { dt });
    }
    let k1 = state_derivative(s, cmd, params);
    let k2 = state_derivative(&advance(s, &k1, 0.5 * dt), cmd, params);
    let k3 = state_derivative(&advance(s, &k2, 0.5 * dt), cmd, params);
    let k4 = state_derivative(&advance(s, &k3, dt), cmd, params);
    let w = dt / 6.0;
    let attitude = s.attitude.matrix() + (k1.attitude + k2.attitude * 2.0 + k3.attitude * 2.0 + k4.attitude) * w;
    Ok(VehicleState {
        position: s.position + (k1.position + k2.position * 2.0 + k3.position * 2.0 + k4.position) * w,
        velocity: s.velocity + (k1.velocity + k2.velocity * 2.0 + k3.velocity * 2.0 + k4.velocity) * w,
        attitude: RotationMatrix::project(&attitude),
        body_rates: s.body_rates + (k1.body_rates + k2.body_rates * 2.0 + k3.body_rates * 2.0 + k4.body_rates) * w,
    })
}
