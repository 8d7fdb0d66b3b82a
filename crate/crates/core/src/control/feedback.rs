//! Conversion of virtual jerk inputs into body wrench rates.

use nalgebra::Vector3;

use super::error_state::TrajectorySample;
use super::lqri::VirtualInput;
use crate::allocation::Wrench;
use crate::dynamics::RigidBodyState;
use crate::morphology::RigidBodyParams;
use crate::scalar::Real;

/// Body wrench rate that turns the tracking error dynamics into pure
/// integrator chains, `de_a/dt = u[0..3]` and `de_psi/dt = u[3..6]`.
///
/// `ḟ` is the rate of the body-frame force coordinates. It follows from
/// `a = R f / m - g e_z`, and `τ̇` from differentiating the Euler equation.
pub fn feedback_linearize<T: Real>(
    u: &VirtualInput<T>,
    state: &RigidBodyState<T>,
    reference: &TrajectorySample<T>,
    body: &RigidBodyParams<T>,
) -> Wrench<T> {
    let r_bw = state.attitude.inverse();
    let w = state.angular_velocity;
    let psi = state.angular_acceleration;
    let u_lin = Vector3::new(u[0], u[1], u[2]);
    let u_ang = Vector3::new(u[3], u[4], u[5]);

    let specific_force = r_bw * (state.acceleration - body.gravity_world()) * body.m;
    let f_dot = r_bw * (reference.jerk + u_lin) * body.m - w.cross(&specific_force);

    let w_d = r_bw * reference.angular_velocity;
    let psi_d = r_bw * reference.angular_acceleration;
    let zeta_d = r_bw * reference.angular_jerk;
    let two = T::lit(2.0);
    let psi_dot = u_ang - psi.cross(&w_d) + w.cross(&w.cross(&w_d)) - w.cross(&psi_d) * two + zeta_d;

    let jw = body.inertia.component_mul(&w);
    let jpsi = body.inertia.component_mul(&psi);
    let tau_dot = body.inertia.component_mul(&psi_dot) + body.r_com.cross(&f_dot) + psi.cross(&jw) + w.cross(&jpsi);
    Wrench::new(f_dot, tau_dot)
}

/// Rigid-body scaling of a body jerk command, `[m j; J zeta]`.
pub fn jerk_to_wrench_rate<T: Real>(jerk_body: &Vector3<T>, zeta: &Vector3<T>, body: &RigidBodyParams<T>) -> Wrench<T> {
    Wrench::new(jerk_body * body.m, body.inertia.component_mul(zeta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::error_state::attitude_errors;
    use crate::dynamics::{angular_acceleration, jerk_dynamics};
    use crate::morphology::Morphology;
    use crate::so3::exp_map;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand3(rng: &mut ChaCha8Rng, s: f64) -> Vector3<f64> {
        Vector3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
    }

    #[test]
    fn hover_gives_zero_rate() {
        let body = Morphology::<f64>::prototype().body;
        let reference = TrajectorySample::hold(0.0, Vector3::zeros());
        let w = feedback_linearize(&VirtualInput::zeros(), &reference.as_state(), &reference, &body);
        assert!(w.force.norm() < 1e-14 && w.torque.norm() < 1e-14);
    }

    #[test]
    fn pure_angular_input_scales_by_inertia() {
        let body = Morphology::<f64>::prototype().body;
        let reference = TrajectorySample::hold(0.0, Vector3::zeros());
        let mut state = reference.as_state();
        state.acceleration = body.gravity_world();
        let u = VirtualInput::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let w = feedback_linearize(&u, &state, &reference, &body);
        assert_relative_eq!(w.torque, Vector3::new(body.inertia.x, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn linearizes_error_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut body = Morphology::<f64>::prototype().body;
        body.r_com = Vector3::new(0.01, -0.005, 0.02);
        for _ in 0..200 {
            let mut state = RigidBodyState::default();
            state.attitude = exp_map(&rand3(&mut rng, 2.0));
            state.angular_velocity = rand3(&mut rng, 3.0);
            let force = rand3(&mut rng, 20.0);
            let torque = rand3(&mut rng, 2.0);
            let wrench = Wrench::new(force, torque);
            state.acceleration = state.attitude * force / body.m + body.gravity_world();
            state.angular_acceleration = angular_acceleration(&state.angular_velocity, &wrench, &body).unwrap();

            let mut reference = TrajectorySample::hold(0.0, Vector3::zeros());
            reference.attitude = exp_map(&rand3(&mut rng, 2.0));
            reference.jerk = rand3(&mut rng, 5.0);
            reference.angular_velocity = rand3(&mut rng, 2.0);
            reference.angular_acceleration = rand3(&mut rng, 2.0);
            reference.angular_jerk = rand3(&mut rng, 2.0);
            let u = VirtualInput::from_fn(|_, _| rng.gen_range(-10.0..10.0));

            let rate = feedback_linearize(&u, &state, &reference, &body);
            let (jerk, zeta) = jerk_dynamics(&state, &wrench, &rate, &body).unwrap();
            assert_relative_eq!(jerk - reference.jerk, Vector3::new(u[0], u[1], u[2]), epsilon = 1e-9);

            // e_psi rate by central differences along the exact trajectory
            let h = 1e-5;
            let e_psi_at = |t: f64| {
                let mut s = state.clone();
                s.attitude = state.attitude * exp_map(&(state.angular_velocity * t + state.angular_acceleration * (0.5 * t * t)));
                s.angular_velocity = state.angular_velocity + state.angular_acceleration * t;
                s.angular_acceleration = state.angular_acceleration + zeta * t;
                let mut r = reference.clone();
                r.attitude = exp_map(&(reference.angular_velocity * t + reference.angular_acceleration * (0.5 * t * t)))
                    * reference.attitude;
                r.angular_velocity = reference.angular_velocity + reference.angular_acceleration * t;
                r.angular_acceleration = reference.angular_acceleration + reference.angular_jerk * t;
                attitude_errors(&s, &r).2
            };
            let de_psi = (e_psi_at(h) - e_psi_at(-h)) / (2.0 * h);
            assert_relative_eq!(de_psi, Vector3::new(u[3], u[4], u[5]), epsilon = 1e-4);
        }
    }

    #[test]
    fn jerk_scaling() {
        let mut body = Morphology::<f64>::prototype().body;
        body.m = 2.0;
        body.inertia = Vector3::new(1.0, 2.0, 3.0);
        let w = jerk_to_wrench_rate(&Vector3::new(1.0, 0.0, 0.0), &Vector3::new(1.0, 1.0, 1.0), &body);
        assert_eq!(w.force, Vector3::new(2.0, 0.0, 0.0));
        assert_eq!(w.torque, Vector3::new(1.0, 2.0, 3.0));
    }
}
