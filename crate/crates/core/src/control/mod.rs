//! Jerk-level trajectory tracking controllers.

pub mod care;
pub mod error_state;
pub mod feedback;
pub mod lqri;
pub mod pid;
pub mod stability;

pub use care::{lqr_gain, solve_care, solve_lyapunov};
pub use error_state::{compute_error_state, ErrorState, Integrators, TrajectorySample};
pub use feedback::{feedback_linearize, jerk_to_wrench_rate};
pub use lqri::{linearized_system, LqriGain, LqriWeights, VirtualInput};
pub use pid::{pid_wrench_rate, JerkCommand, PidController, PidGains, PidOutput};
pub use stability::{stability_condition, stability_margin, StabilityCheck};
