//! Flight dynamics, cascaded control and maneuver sequencing for automated
//! helicopter landings on steeply pitched pads.
//!
//! The crate is split by loop level:
//!
//! - [`so3`]: rotation matrices, Euler angles, exp/log maps.
//! - [`dynamics`]: the simplified plant and its RK4 integrator.
//! - [`control`]: position, velocity, attitude and collective loops.
//! - [`sequencer`]: the hover/approach/flare/bond/abort automaton.
//! - [`sim`]: closed-loop runs, sensor noise, logs and summaries.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod sequencer;
pub mod sim;
pub mod so3;

pub use control::{ControlMode, ControllerMemory, GainSet, Setpoint};
pub use dynamics::{ActuatorCommand, VehicleParams, VehicleState};
pub use error::{ConstraintViolation, ControlError, DynamicsError, GeometryError, SequencerError, SimError};
pub use sequencer::{Corridor, LandingPad, ManeuverConfig, ManeuverPhase};
pub use sim::{run_scenario, Outcome, RunSummary, ScenarioConfig, SensorModel, TrajectoryLog};
pub use so3::{EulerAngles, RotationMatrix, Vec3};
