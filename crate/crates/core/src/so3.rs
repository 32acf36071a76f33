//! Rotation-group numerics.
//!
//! Attitudes are stored as body-to-inertial rotation matrices. Euler angles
//! follow the aerospace Z-Y-X (yaw, pitch, roll) sequence, so
//! `R = Rz(yaw) * Ry(pitch) * Rx(roll)`. The inertial frame is
//! north-east-down: positive pitch raises the nose.
//!
//! The exponential and logarithm maps connect rotations with axis-angle
//! vectors. Both switch to truncated series below [`SMALL_ANGLE`] so they
//! never divide by a vanishing sine.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub type Vec3 = Vector3<f64>;

/// Below this angle (rad) exp/log use second-order series.
pub const SMALL_ANGLE: f64 = 1e-5;

/// Distance from pi (rad) inside which the logarithm refuses to pick an axis.
pub const PI_MARGIN: f64 = 1e-6;

/// Orthonormality tolerance accepted by [`RotationMatrix::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-9;

const GIMBAL_MARGIN: f64 = 1e-6;

/// A proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Checks orthonormality and handedness before accepting `m`.
    pub fn new(m: Matrix3<f64>) -> Result<Self, GeometryError> {
        let residual = orthonormality_residual(&m);
        let det = m.determinant();
        if !m.iter().all(|v| v.is_finite()) || residual > ORTHONORMAL_TOL || (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(GeometryError::NotARotation { residual, det });
        }
        Ok(Self(m))
    }

    /// Nearest rotation to `m` in the Frobenius sense, via SVD.
    pub fn project(m: &Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd computed with u");
        let v_t = svd.v_t.expect("svd computed with v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut d = Matrix3::identity();
            d[(2, 2)] = -1.0;
            r = u * d * v_t;
        }
        Self(r)
    }

    /// Wraps `m` without checking. Callers must guarantee it is a rotation.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &RotationMatrix) -> Self {
        Self(self.0 * other.0)
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Largest entry of `R^T R - I`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_residual(&self.0)
    }

    /// Max absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &RotationMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }

    /// Rotation about a single inertial axis.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }
}

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

fn orthonormality_residual(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// Roll, pitch, yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }
}

/// Builds `Rz(yaw) * Ry(pitch) * Rx(roll)` in closed form.
pub fn euler_to_rotation(e: EulerAngles) -> RotationMatrix {
    let (sf, cf) = e.roll.sin_cos();
    let (st, ct) = e.pitch.sin_cos();
    let (sp, cp) = e.yaw.sin_cos();
    RotationMatrix(Matrix3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    ))
}

/// Inverse of [`euler_to_rotation`] away from pitch = +-pi/2.
pub fn rotation_to_euler(r: &RotationMatrix) -> Result<EulerAngles, GeometryError> {
    let r31 = r.0[(2, 0)];
    if r31.abs() >= 1.0 - GIMBAL_MARGIN {
        return Err(GeometryError::GimbalLock { r31 });
    }
    Ok(euler_unchecked(r))
}

/// Euler extraction that never fails; at gimbal lock the roll/yaw split is
/// arbitrary but the result is still finite. Used inside the plant, where
/// large excursions must not abort integration.
pub(crate) fn euler_unchecked(r: &RotationMatrix) -> EulerAngles {
    let m = &r.0;
    EulerAngles {
        roll: m[(2, 1)].atan2(m[(2, 2)]),
        pitch: -m[(2, 0)].clamp(-1.0, 1.0).asin(),
        yaw: m[(1, 0)].atan2(m[(0, 0)]),
    }
}

/// Cross-product matrix: `hat(a) * b == a x b`.
pub fn hat(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`] applied to the skew part of `m`.
pub fn vee_skew(m: &Matrix3<f64>) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Rodrigues' formula.
pub fn rotation_exp(v: &Vec3) -> RotationMatrix {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        let (s, c) = theta.sin_cos();
        (s / theta, (1.0 - c) / theta2)
    };
    let k = hat(v);
    RotationMatrix(Matrix3::identity() + k * a + k * k * b)
}

/// Axis-angle vector of `r`; its norm is the rotation angle.
pub fn rotation_log(r: &RotationMatrix) -> Result<Vec3, GeometryError> {
    let m = &r.0;
    let axis_sin = vee_skew(m);
    let sin_theta = axis_sin.norm();
    let cos_theta = 0.5 * (m.trace() - 1.0);
    let theta = sin_theta.atan2(cos_theta);
    if theta >= std::f64::consts::PI - PI_MARGIN {
        return Err(GeometryError::NearPiRotation { angle: theta });
    }
    if theta < SMALL_ANGLE {
        // theta / sin(theta) ~ 1 + theta^2 / 6
        Ok(axis_sin * (1.0 + theta * theta / 6.0))
    } else {
        Ok(axis_sin * (theta / sin_theta))
    }
}

/// Attitude error vector `log(R_cmd^T R)`.
pub fn attitude_error(r_cmd: &RotationMatrix, r: &RotationMatrix) -> Result<Vec3, GeometryError> {
    rotation_log(&r_cmd.transpose().compose(r))
}

/// Geodesic angle between two attitudes.
pub fn attitude_distance(a: &RotationMatrix, b: &RotationMatrix) -> Result<f64, GeometryError> {
    attitude_error(a, b).map(|e| e.norm())
}

/// Rotates an inertial planar vector into the yaw-aligned body frame.
pub fn inertial_to_body_planar(vx: f64, vy: f64, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    (c * vx + s * vy, -s * vx + c * vy)
}

/// Transpose of [`inertial_to_body_planar`].
pub fn body_to_inertial_planar(u: f64, v: f64, yaw: f64) -> (f64, f64) {
    let (s, c) = yaw.sin_cos();
    (c * u - s * v, s * u + c * v)
}
