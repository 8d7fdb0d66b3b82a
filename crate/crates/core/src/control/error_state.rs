//! Tracking reference and the 24-dimensional tracking error.

use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::RigidBodyState;
use crate::scalar::Real;
use crate::so3::{attitude_error, RotationSO3};

/// One reference sample. Translational derivatives and the angular
/// velocity, acceleration and jerk are expressed in the world frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TrajectorySample<T: Real> {
    pub time: T,
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
    pub acceleration: Vector3<T>,
    pub jerk: Vector3<T>,
    pub attitude: RotationSO3<T>,
    pub angular_velocity: Vector3<T>,
    pub angular_acceleration: Vector3<T>,
    pub angular_jerk: Vector3<T>,
}

impl<T: Real> TrajectorySample<T> {
    /// Stationary reference at `position` with identity attitude.
    pub fn hold(time: T, position: Vector3<T>) -> Self {
        Self {
            time,
            position,
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            jerk: Vector3::zeros(),
            attitude: RotationSO3::identity(),
            angular_velocity: Vector3::zeros(),
            angular_acceleration: Vector3::zeros(),
            angular_jerk: Vector3::zeros(),
        }
    }

    /// The state this reference describes.
    pub fn as_state(&self) -> RigidBodyState<T> {
        let r_bw = self.attitude.inverse();
        RigidBodyState {
            position: self.position,
            velocity: self.velocity,
            acceleration: self.acceleration,
            attitude: self.attitude,
            angular_velocity: r_bw * self.angular_velocity,
            angular_acceleration: r_bw * self.angular_acceleration,
        }
    }
}

pub type ErrorVector<T> = SVector<T, 24>;

/// Tracking error blocks. The first four are in the world frame, the
/// attitude blocks in the body frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ErrorState<T: Real> {
    pub e_p: Vector3<T>,
    pub e_p_int: Vector3<T>,
    pub e_v: Vector3<T>,
    pub e_a: Vector3<T>,
    pub e_r: Vector3<T>,
    pub e_r_int: Vector3<T>,
    pub e_omega: Vector3<T>,
    pub e_psi: Vector3<T>,
}

impl<T: Real> ErrorState<T> {
    pub fn blocks(&self) -> [Vector3<T>; 8] {
        [self.e_p, self.e_p_int, self.e_v, self.e_a, self.e_r, self.e_r_int, self.e_omega, self.e_psi]
    }

    pub fn to_vector(&self) -> ErrorVector<T> {
        let mut out = ErrorVector::zeros();
        for (k, b) in self.blocks().iter().enumerate() {
            out.fixed_rows_mut::<3>(3 * k).copy_from(b);
        }
        out
    }

    pub fn from_vector(v: &ErrorVector<T>) -> Self {
        let b = |k: usize| -> Vector3<T> { v.fixed_rows::<3>(3 * k).into() };
        Self {
            e_p: b(0),
            e_p_int: b(1),
            e_v: b(2),
            e_a: b(3),
            e_r: b(4),
            e_r_int: b(5),
            e_omega: b(6),
            e_psi: b(7),
        }
    }
}

/// Integrator memory with symmetric clamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Integrators<T: Real> {
    pub position: Vector3<T>,
    pub attitude: Vector3<T>,
    pub last_e_p: Option<Vector3<T>>,
    pub last_e_r: Option<Vector3<T>>,
    /// Clamp on the position integral [m s].
    pub position_limit: T,
    /// Clamp on the attitude integral [rad s].
    pub attitude_limit: T,
}

impl<T: Real> Default for Integrators<T> {
    fn default() -> Self {
        Self::with_limits(T::lit(2.0), T::one())
    }
}

impl<T: Real> Integrators<T> {
    pub fn with_limits(position_limit: T, attitude_limit: T) -> Self {
        Self {
            position: Vector3::zeros(),
            attitude: Vector3::zeros(),
            last_e_p: None,
            last_e_r: None,
            position_limit,
            attitude_limit,
        }
    }

    fn accumulate(acc: &mut Vector3<T>, last: &mut Option<Vector3<T>>, e: Vector3<T>, dt: T, limit: T) {
        let prev = last.unwrap_or(e);
        *acc += (prev + e) * (dt * T::lit(0.5));
        *acc = acc.map(|x| x.max(-limit).min(limit));
        *last = Some(e);
    }

    pub fn reset(&mut self) {
        *self = Self::with_limits(self.position_limit, self.attitude_limit);
    }
}

/// Attitude-related error terms `(e_R, e_omega, e_psi)`, with
/// `e_psi` the time derivative of `e_omega`.
pub fn attitude_errors<T: Real>(
    state: &RigidBodyState<T>,
    reference: &TrajectorySample<T>,
) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
    let r_bw = state.attitude.inverse();
    let w = state.angular_velocity;
    let w_d = r_bw * reference.angular_velocity;
    let psi_d = r_bw * reference.angular_acceleration;
    let e_r = attitude_error(&state.attitude, &reference.attitude);
    let e_omega = w - w_d;
    let e_psi = state.angular_acceleration + w.cross(&w_d) - psi_d;
    (e_r, e_omega, e_psi)
}

/// Evaluates all eight error blocks and advances the trapezoidal
/// integrators by `dt` (pass `dt = 0` to evaluate without integrating).
pub fn compute_error_state<T: Real>(
    state: &RigidBodyState<T>,
    reference: &TrajectorySample<T>,
    integrators: &mut Integrators<T>,
    dt: T,
) -> ErrorState<T> {
    let e_p = state.position - reference.position;
    let e_v = state.velocity - reference.velocity;
    let e_a = state.acceleration - reference.acceleration;
    let (e_r, e_omega, e_psi) = attitude_errors(state, reference);
    if dt > T::zero() {
        let (pl, al) = (integrators.position_limit, integrators.attitude_limit);
        Integrators::accumulate(&mut integrators.position, &mut integrators.last_e_p, e_p, dt, pl);
        Integrators::accumulate(&mut integrators.attitude, &mut integrators.last_e_r, e_r, dt, al);
    }
    ErrorState {
        e_p,
        e_p_int: integrators.position,
        e_v,
        e_a,
        e_r,
        e_r_int: integrators.attitude,
        e_omega,
        e_psi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::rot_x;
    use approx::assert_relative_eq;

    #[test]
    fn zero_error_at_reference() {
        let mut r = TrajectorySample::hold(0.0, Vector3::new(1.0, 2.0, 3.0));
        r.attitude = rot_x(0.3);
        r.angular_velocity = Vector3::new(0.1, -0.2, 0.3);
        r.angular_acceleration = Vector3::new(0.5, 0.0, -0.1);
        r.velocity = Vector3::new(1.0, 0.0, 0.0);
        let mut ints = Integrators::default();
        let e = compute_error_state(&r.as_state(), &r, &mut ints, 0.01);
        assert!(e.to_vector().norm() < 1e-14);
    }

    #[test]
    fn position_offset() {
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let s = RigidBodyState::at(Vector3::new(1.0, 0.0, 0.0));
        let mut ints = Integrators::default();
        let e = compute_error_state(&s, &r, &mut ints, 0.01);
        assert_eq!(e.e_p, Vector3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(e.e_p_int, Vector3::new(0.01, 0.0, 0.0));
        let mut v = e.to_vector();
        v.fixed_rows_mut::<3>(0).fill(0.0);
        v.fixed_rows_mut::<3>(3).fill(0.0);
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn quarter_roll_attitude_error() {
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let mut s = RigidBodyState::default();
        s.attitude = rot_x(std::f64::consts::FRAC_PI_2);
        let e = compute_error_state(&s, &r, &mut Integrators::default(), 0.0);
        assert_relative_eq!(e.e_r, Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn integrators_are_clamped() {
        let r = TrajectorySample::hold(0.0, Vector3::zeros());
        let s = RigidBodyState::at(Vector3::new(5.0, -5.0, 0.0));
        let mut ints = Integrators::default();
        for _ in 0..1000 {
            compute_error_state(&s, &r, &mut ints, 0.01);
        }
        assert_eq!(ints.position, Vector3::new(2.0, -2.0, 0.0));
    }

    #[test]
    fn vector_round_trip() {
        let v = ErrorVector::<f64>::from_fn(|i, _| i as f64);
        assert_eq!(ErrorState::from_vector(&v).to_vector(), v);
    }
}
