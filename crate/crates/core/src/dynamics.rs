//! Rigid-body and actuator dynamics.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::allocation::Wrench;
use crate::error::{ModelError, Result};
use crate::morphology::RigidBodyParams;
use crate::scalar::Real;
use crate::so3::{exp_map, RotationSO3};

/// Pose and its derivatives. Translational quantities are in the world
/// frame, rotational ones in the body frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RigidBodyState<T: Real> {
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
    pub acceleration: Vector3<T>,
    /// `R_WB`.
    pub attitude: RotationSO3<T>,
    pub angular_velocity: Vector3<T>,
    pub angular_acceleration: Vector3<T>,
}

impl<T: Real> Default for RigidBodyState<T> {
    fn default() -> Self {
        Self::at(Vector3::zeros())
    }
}

impl<T: Real> RigidBodyState<T> {
    /// At rest at `position` with identity attitude.
    pub fn at(position: Vector3<T>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            attitude: RotationSO3::identity(),
            angular_velocity: Vector3::zeros(),
            angular_acceleration: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.position, self.velocity, self.acceleration, self.angular_velocity, self.angular_acceleration]
            .iter()
            .flat_map(|v| v.iter())
            .chain(self.attitude.matrix().iter())
            .all(|x| x.is_finite())
    }

    pub fn velocity_body(&self) -> Vector3<T> {
        self.attitude.inverse_transform_vector(&self.velocity)
    }

    pub fn kinetic_energy(&self, body: &RigidBodyParams<T>) -> T {
        let half = T::lit(0.5);
        let w = &self.angular_velocity;
        half * body.m * self.velocity.norm_squared() + half * w.dot(&body.inertia.component_mul(w))
    }
}

/// Tilt angles (one per arm) and rotor speeds (one per rotor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ActuatorState<T: Real> {
    pub alpha: Vec<T>,
    pub omega: Vec<T>,
}

impl<T: Real> ActuatorState<T> {
    pub fn new(alpha: Vec<T>, omega: Vec<T>) -> Self {
        Self { alpha, omega }
    }

    pub fn omega_sq(&self) -> Vec<T> {
        self.omega.iter().map(|w| *w * *w).collect()
    }
}

/// Body-frame accelerations from the Newton-Euler equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyAccelerations<T: Real> {
    pub linear: Vector3<T>,
    pub angular: Vector3<T>,
}

fn inverse_inertia<T: Real>(body: &RigidBodyParams<T>) -> Result<Vector3<T>> {
    if body.inertia.iter().any(|j| !(*j > T::zero())) {
        return Err(ModelError::SingularInertia);
    }
    Ok(body.inertia.map(|j| T::one() / j))
}

/// Angular acceleration `J^-1 (tau - r_com x f - w x J w)`.
pub fn angular_acceleration<T: Real>(
    omega: &Vector3<T>,
    wrench: &Wrench<T>,
    body: &RigidBodyParams<T>,
) -> Result<Vector3<T>> {
    let j_inv = inverse_inertia(body)?;
    let jw = body.inertia.component_mul(omega);
    let rhs = wrench.torque - body.r_com.cross(&wrench.force) - omega.cross(&jw);
    Ok(rhs.component_mul(&j_inv))
}

/// Newton-Euler equations in the body frame:
/// `m (dv_B + w x v_B) = f + m g_B`, `J dw + w x J w = tau`.
pub fn eom_forward<T: Real>(
    state: &RigidBodyState<T>,
    wrench: &Wrench<T>,
    body: &RigidBodyParams<T>,
) -> Result<BodyAccelerations<T>> {
    let w = &state.angular_velocity;
    let v_b = state.velocity_body();
    let g_b = state.attitude.inverse_transform_vector(&body.gravity_world());
    let linear = wrench.force / body.m + g_b - w.cross(&v_b);
    let angular = angular_acceleration(w, wrench, body)?;
    Ok(BodyAccelerations { linear, angular })
}

/// World-frame acceleration of the body origin, `R f / m + g_W`.
pub fn world_acceleration<T: Real>(
    attitude: &RotationSO3<T>,
    force: &Vector3<T>,
    body: &RigidBodyParams<T>,
) -> Vector3<T> {
    attitude * force / body.m + body.gravity_world()
}

/// Derivatives of acceleration for a given wrench and wrench rate:
/// world-frame linear jerk and body-frame angular jerk.
pub fn jerk_dynamics<T: Real>(
    state: &RigidBodyState<T>,
    wrench: &Wrench<T>,
    wrench_rate: &Wrench<T>,
    body: &RigidBodyParams<T>,
) -> Result<(Vector3<T>, Vector3<T>)> {
    let j_inv = inverse_inertia(body)?;
    let w = &state.angular_velocity;
    let psi = &state.angular_acceleration;
    let jerk = state.attitude * (wrench_rate.force + w.cross(&wrench.force)) / body.m;
    let jw = body.inertia.component_mul(w);
    let jpsi = body.inertia.component_mul(psi);
    let rhs = wrench_rate.torque - body.r_com.cross(&wrench_rate.force) - psi.cross(&jw) - w.cross(&jpsi);
    Ok((jerk, rhs.component_mul(&j_inv)))
}

/// Exact response of the first-order tilt model over one step.
#[inline]
pub fn tilt_step<T: Real>(alpha: T, alpha_ref: T, tau: T, dt: T) -> T {
    alpha_ref + (alpha - alpha_ref) * (-dt / tau).exp()
}

/// Tilt rate of the first-order model.
#[inline]
pub fn tilt_rate<T: Real>(alpha: T, alpha_ref: T, tau: T) -> T {
    (alpha_ref - alpha) / tau
}

/// One RK4 step of the rigid body under a body-frame wrench held constant
/// over `dt`. The attitude is advanced with the exponential map of the
/// RK4-weighted angular velocity, so it never leaves SO(3). The stored
/// accelerations are evaluated at the end of the step.
pub fn rk4_step<T: Real>(
    state: &RigidBodyState<T>,
    wrench: &Wrench<T>,
    body: &RigidBodyParams<T>,
    dt: T,
) -> Result<RigidBodyState<T>> {
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);
    let r0 = state.attitude;
    let (v0, w0) = (state.velocity, state.angular_velocity);

    let a1 = world_acceleration(&r0, &wrench.force, body);
    let d1 = angular_acceleration(&w0, wrench, body)?;

    let r2 = r0 * exp_map(&(w0 * (half * dt)));
    let w2 = w0 + d1 * (half * dt);
    let v2 = v0 + a1 * (half * dt);
    let a2 = world_acceleration(&r2, &wrench.force, body);
    let d2 = angular_acceleration(&w2, wrench, body)?;

    let r3 = r0 * exp_map(&(w2 * (half * dt)));
    let w3 = w0 + d2 * (half * dt);
    let v3 = v0 + a2 * (half * dt);
    let a3 = world_acceleration(&r3, &wrench.force, body);
    let d3 = angular_acceleration(&w3, wrench, body)?;

    let r4 = r0 * exp_map(&(w3 * dt));
    let w4 = w0 + d3 * dt;
    let v4 = v0 + a3 * dt;
    let a4 = world_acceleration(&r4, &wrench.force, body);
    let d4 = angular_acceleration(&w4, wrench, body)?;

    let position = state.position + (v0 + v2 * two + v3 * two + v4) * (sixth * dt);
    let velocity = v0 + (a1 + a2 * two + a3 * two + a4) * (sixth * dt);
    let angular_velocity = w0 + (d1 + d2 * two + d3 * two + d4) * (sixth * dt);
    let w_avg = (w0 + w2 * two + w3 * two + w4) * sixth;
    let mut attitude = r0 * exp_map(&(w_avg * dt));
    attitude.renormalize();

    let acceleration = world_acceleration(&attitude, &wrench.force, body);
    let angular_acceleration = angular_acceleration(&angular_velocity, wrench, body)?;
    let next = RigidBodyState {
        position,
        velocity,
        acceleration,
        attitude,
        angular_velocity,
        angular_acceleration,
    };
    if !next.is_finite() {
        return Err(ModelError::Numerical("non-finite rigid body state".into()));
    }
    Ok(next)
}
