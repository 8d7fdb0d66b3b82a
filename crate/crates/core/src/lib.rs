//! Models shared by the tiltrotor design and simulation tools: frames and
//! rigid-body dynamics, the static, instantaneous and differential
//! allocation matrices, jerk-level controllers and the differential
//! actuator allocator.
//!
//! Numerical routines are generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below are what the rest of the workspace uses.

pub mod allocation;
pub mod control;
pub mod diff_alloc;
pub mod dynamics;
pub mod error;
pub mod icosphere;
pub mod morphology;
pub mod scalar;
pub mod so3;

pub use allocation::{
    build_static_allocation, condition_number, instantaneous_allocation, omega_tilde, rotor_wrench,
    wrench_from_actuators, Wrench,
};
pub use control::{
    compute_error_state, feedback_linearize, linearized_system, solve_care, ErrorState, JerkCommand, LqriGain,
    LqriWeights, PidController, PidGains, TrajectorySample,
};
pub use diff_alloc::{condition_scan, AllocatorConfig, BiasConfig, DiffAllocation, DifferentialAllocator, UnwindConfig};
pub use dynamics::{eom_forward, jerk_dynamics, rk4_step, tilt_step, ActuatorState, RigidBodyState};
pub use error::{ModelError, Result};
pub use icosphere::Icosphere;
pub use morphology::{ArmGeometry, Morphology, RateLimits, RigidBodyParams, RotorParams, TiltParams, GRAVITY};
pub use scalar::Real;
pub use so3::{attitude_error, skew, vee, RotationSO3};

pub type MorphologyF64 = Morphology<f64>;
pub type MorphologyF32 = Morphology<f32>;
pub type RigidBodyStateF64 = RigidBodyState<f64>;
pub type RigidBodyStateF32 = RigidBodyState<f32>;
pub type WrenchF64 = Wrench<f64>;
pub type WrenchF32 = Wrench<f32>;
pub type TrajectorySampleF64 = TrajectorySample<f64>;
pub type TrajectorySampleF32 = TrajectorySample<f32>;
pub type LqriGainF64 = LqriGain<f64>;
pub type LqriGainF32 = LqriGain<f32>;
pub type DifferentialAllocatorF64 = DifferentialAllocator<f64>;
pub type DifferentialAllocatorF32 = DifferentialAllocator<f32>;
