//! Batch commands behind the `tiltrotor` binary. Each command reads one
//! [`RunConfig`], writes its outputs to a directory and records them in a
//! per-command manifest.

pub mod commands;
pub mod config;

pub use commands::{
    calibrate_mass, condition_scan, envelope, load_trajectory, optimize, simulate, sweep, Outcome, SimulateSummary,
};
pub use config::{Overrides, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const INFEASIBLE: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation diverged at t = {time:.3} s: {reason}")]
    Diverged { time: f64, reason: String },
    #[error("no feasible design: the force envelope does not contain the weight")]
    Infeasible,
    #[error("{0}")]
    Failed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => exit::CONFIG,
            Self::Diverged { .. } => exit::DIVERGED,
            Self::Infeasible => exit::INFEASIBLE,
            Self::Failed(_) | Self::Io(_) => exit::FAILURE,
        }
    }
}

impl From<tiltrotor_design::DesignError> for CliError {
    fn from(e: tiltrotor_design::DesignError) -> Self {
        match e {
            tiltrotor_design::DesignError::Invalid(m) => Self::Config(m),
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<tiltrotor_sim::SimError> for CliError {
    fn from(e: tiltrotor_sim::SimError) -> Self {
        match e {
            tiltrotor_sim::SimError::Config(m) => Self::Config(m),
            tiltrotor_sim::SimError::Diverged { time, reason, .. } => Self::Diverged { time, reason },
            other => Self::Failed(other.to_string()),
        }
    }
}

impl From<tiltrotor_core::ModelError> for CliError {
    fn from(e: tiltrotor_core::ModelError) -> Self {
        use tiltrotor_core::ModelError as M;
        match e {
            M::InvalidMorphology(_) | M::Dimension { .. } | M::Domain(_) | M::SingularInertia => Self::Config(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}
