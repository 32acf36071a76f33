use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("matrix is not a proper rotation (orthonormality residual {residual:.3e}, det {det})")]
    NotARotation { residual: f64, det: f64 },
    #[error("pitch at gimbal lock (R31 = {r31})")]
    GimbalLock { r31: f64 },
    #[error("rotation angle {angle} rad too close to pi for a well-defined axis")]
    NearPiRotation { angle: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("integration step {dt} s exceeds the 0.02 s limit")]
    StepTooLarge { dt: f64 },
    #[error("integration step {dt} s must be positive and finite")]
    InvalidStep { dt: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("collective thrust {thrust} N too low to invert the planar dynamics")]
    ThrustTooLow { thrust: f64 },
    #[error("cos(pitch)*cos(roll) = {cos_product} leaves no vertical authority")]
    AttitudeTooSteep { cos_product: f64 },
    #[error("setpoint is missing {0} required by the active control mode")]
    MissingSetpoint(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequencerError {
    #[error("no setpoints exist for the terminal Bonded phase")]
    TerminalPhase,
    #[error("cannot bond: skids are not in contact with the pad")]
    NotInContact,
}

/// A violated configuration invariant, named the way it reads in the config.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("constraint violated: {0}")]
pub struct ConstraintViolation(pub String);

impl ConstraintViolation {
    pub fn new(invariant: impl Into<String>) -> Self {
        Self(invariant.into())
    }
}

pub(crate) fn require(ok: bool, invariant: &str) -> Result<(), ConstraintViolation> {
    if ok {
        Ok(())
    } else {
        Err(ConstraintViolation::new(invariant))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario config: {0}")]
    ConfigInvalid(#[from] ConstraintViolation),
    #[error("trajectory log is empty")]
    EmptyLog,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
