//! Design tools for tiltrotor morphologies: a parametric mass model, wrench
//! envelopes with efficiency indices, and a multi-start optimizer over the
//! arm angles.

pub mod compare;
pub mod envelope;
pub mod mass;
pub mod optimize;

pub use compare::{compare, ComparisonRow};
pub use envelope::{
    envelope, force_efficiency, hover_sphere, max_wrench_in_direction, torque_efficiency, EnvelopeKind,
    EnvelopeMethod, EnvelopeMetrics, EnvelopeSample, EnvelopeSolver, EnvelopeSummary, HoverSphere,
};
pub use optimize::{
    beta_sweep, design_report, nelder_mead, optimize, CostFunction, DesignProblem, DesignResult, Evaluation, HoverSummary,
    SweepPoint,
};
pub use mass::{calibrate, compute_mass_inertia, Calibration, MassModel};

#[derive(Debug, thiserror::Error)]
pub enum DesignError {
    #[error("invalid design input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] tiltrotor_core::ModelError),
}
