//! Closed-loop simulation of tiltrotor vehicles: offline reference
//! trajectories, a first-order actuator plant on an RK4 rigid body,
//! Savitzky-Golay acceleration estimates and tracking statistics.

pub mod config;
pub mod filter;
pub mod log;
pub mod manifest;
pub mod plant;
pub mod run;
pub mod stats;
pub mod trajectory;

pub use config::{ControllerKind, PidJerk, SimConfig};
pub use filter::{sg_derivative, sg_filter, SavitzkyGolay, SgOutput};
pub use log::{LogRow, SimLog, LOG_SCHEMA};
pub use manifest::{sha256_hex, OutputEntry, RunManifest, MANIFEST_SCHEMA};
pub use plant::{force_efficiency, step_plant, Plant};
pub use run::{initial_actuators, run};
pub use stats::{efficiency_timeline, kappa_timeline, stats, AxisStats, TrackingStats, AXIS_NAMES};
pub use trajectory::{named_trajectory, named_waypoints, polynomial_trajectory, NamedTrajectory, Trajectory, Waypoint};

use tiltrotor_core::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite plant state: {0}")]
    NonFinite(String),
    /// The run stopped early; `log` holds every row up to `time`.
    #[error("diverged at t = {time:.3} s: {reason}")]
    Diverged { time: f64, reason: String, log: Box<SimLog> },
}
