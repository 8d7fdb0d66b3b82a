//! Cascaded PID acting on acceleration, differentiated to jerk.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::error_state::{compute_error_state, ErrorState, Integrators, TrajectorySample};
use crate::allocation::Wrench;
use crate::dynamics::RigidBodyState;
use crate::error::{ModelError, Result};
use crate::morphology::RigidBodyParams;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PidGains<T: Real> {
    pub k_p: T,
    pub k_p_i: T,
    pub k_v: T,
    #[serde(rename = "k_R")]
    pub k_r: T,
    #[serde(rename = "k_R_i")]
    pub k_r_i: T,
    pub k_omega: T,
}

impl<T: Real> PidGains<T> {
    /// Gains used on the prototype in flight experiments.
    pub fn paper() -> Self {
        Self {
            k_p: T::lit(5.0),
            k_p_i: T::lit(0.3),
            k_v: T::lit(1.0),
            k_r: T::lit(3.5),
            k_r_i: T::lit(0.3),
            k_omega: T::lit(0.8),
        }
    }
}

/// Body jerk command: linear jerk and angular jerk, both body frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct JerkCommand<T: Real> {
    pub linear: Vector3<T>,
    pub angular: Vector3<T>,
}

impl<T: Real> JerkCommand<T> {
    pub fn zero() -> Self {
        Self { linear: Vector3::zeros(), angular: Vector3::zeros() }
    }
}

/// Acceleration-level commands and the resulting jerk of one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PidOutput<T: Real> {
    /// Commanded world acceleration.
    pub acceleration: Vector3<T>,
    /// Commanded body angular acceleration.
    pub angular_acceleration: Vector3<T>,
    pub jerk: JerkCommand<T>,
    pub error: ErrorState<T>,
}

/// PID state: integrators and the previous acceleration commands.
#[derive(Clone, Debug)]
pub struct PidController<T: Real> {
    pub gains: PidGains<T>,
    pub integrators: Integrators<T>,
    prev: Option<(Vector3<T>, Vector3<T>)>,
}

impl<T: Real> PidController<T> {
    pub fn new(gains: PidGains<T>) -> Self {
        Self { gains, integrators: Integrators::default(), prev: None }
    }

    pub fn reset(&mut self) {
        self.integrators.reset();
        self.prev = None;
    }

    /// Acceleration commands for the current error (no state change).
    pub fn acceleration_commands(
        &self,
        e: &ErrorState<T>,
        state: &RigidBodyState<T>,
        reference: &TrajectorySample<T>,
    ) -> (Vector3<T>, Vector3<T>) {
        let g = &self.gains;
        let a = reference.acceleration - (e.e_p * g.k_p + e.e_v * g.k_v + e.e_p_int * g.k_p_i);
        let r_bw = state.attitude.inverse();
        let w_d = r_bw * reference.angular_velocity;
        let psi_ff = r_bw * reference.angular_acceleration - state.angular_velocity.cross(&w_d);
        let psi = psi_ff - (e.e_r * g.k_r + e.e_omega * g.k_omega + e.e_r_int * g.k_r_i);
        (a, psi)
    }

    /// One control step. The first call has no history and returns zero
    /// jerk; afterwards the jerk is the backward difference of consecutive
    /// acceleration commands, the linear part rotated into the body frame.
    pub fn step(
        &mut self,
        state: &RigidBodyState<T>,
        reference: &TrajectorySample<T>,
        dt: T,
    ) -> Result<PidOutput<T>> {
        if !(dt > T::zero()) {
            return Err(ModelError::Domain("control period must be positive".into()));
        }
        let e = compute_error_state(state, reference, &mut self.integrators, dt);
        let (a, psi) = self.acceleration_commands(&e, state, reference);
        let jerk = match self.prev {
            None => JerkCommand::zero(),
            Some((a_prev, psi_prev)) => JerkCommand {
                linear: state.attitude.inverse_transform_vector(&((a - a_prev) / dt)),
                angular: (psi - psi_prev) / dt,
            },
        };
        self.prev = Some((a, psi));
        Ok(PidOutput { acceleration: a, angular_acceleration: psi, jerk, error: e })
    }
}

/// Wrench rate for a PID jerk command. Besides the inertial scaling this
/// includes the rate of the body-frame coordinates of the commanded wrench
/// caused by rotation, so that the integrated wrench follows the
/// acceleration commands while the vehicle turns.
pub fn pid_wrench_rate<T: Real>(
    out: &PidOutput<T>,
    state: &RigidBodyState<T>,
    body: &RigidBodyParams<T>,
) -> Wrench<T> {
    let w = state.angular_velocity;
    let f_cmd = state.attitude.inverse_transform_vector(&(out.acceleration - body.gravity_world())) * body.m;
    let f_dot = out.jerk.linear * body.m - w.cross(&f_cmd);
    let jw = body.inertia.component_mul(&w);
    let jpsi = body.inertia.component_mul(&out.angular_acceleration);
    let tau_dot = body.inertia.component_mul(&out.jerk.angular)
        + body.r_com.cross(&f_dot)
        + out.angular_acceleration.cross(&jw)
        + w.cross(&jpsi);
    Wrench::new(f_dot, tau_dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zero_int_gains() -> PidGains<f64> {
        PidGains { k_p_i: 0.0, k_r_i: 0.0, ..PidGains::paper() }
    }

    #[test]
    fn first_step_returns_zero_jerk() {
        let mut pid = PidController::new(PidGains::paper());
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let s = RigidBodyState::at(Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(pid.step(&s, &r, 0.01).unwrap().jerk, JerkCommand::zero());
        assert!(pid.step(&s, &r, 0.0).is_err());
    }

    #[test]
    fn zero_error_gives_zero_jerk() {
        let mut pid = PidController::new(PidGains::paper());
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let s = r.as_state();
        pid.step(&s, &r, 0.01).unwrap();
        assert_eq!(pid.step(&s, &r, 0.01).unwrap().jerk, JerkCommand::zero());
    }

    #[test]
    fn constant_error_without_integral_gives_zero_jerk() {
        let mut pid = PidController::new(zero_int_gains());
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let s = RigidBodyState::at(Vector3::new(0.3, -0.2, 0.1));
        pid.step(&s, &r, 0.01).unwrap();
        assert_eq!(pid.step(&s, &r, 0.01).unwrap().jerk, JerkCommand::zero());
    }

    #[test]
    fn position_step_difference_quotient() {
        let mut pid = PidController::new(zero_int_gains());
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        pid.step(&RigidBodyState::default(), &r, 0.01).unwrap();
        let out = pid.step(&RigidBodyState::at(Vector3::new(1.0, 0.0, 0.0)), &r, 0.01).unwrap();
        assert_relative_eq!(out.acceleration, Vector3::new(-5.0, 0.0, 0.0));
        assert_relative_eq!(out.jerk.linear, Vector3::new(-500.0, 0.0, 0.0), epsilon = 1e-9);
    }

    #[test]
    fn jerk_is_bitwise_difference_of_commands() {
        let mut pid = PidController::new(PidGains::paper());
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let mut s = RigidBodyState::at(Vector3::new(0.2, 0.1, -0.1));
        let first = pid.step(&s, &r, 0.01).unwrap();
        s.velocity = Vector3::new(0.5, 0.0, 0.0);
        let second = pid.step(&s, &r, 0.01).unwrap();
        assert_eq!(second.jerk.linear, (second.acceleration - first.acceleration) / 0.01);
        assert_eq!(second.jerk.angular, (second.angular_acceleration - first.angular_acceleration) / 0.01);
    }
}
