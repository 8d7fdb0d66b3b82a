//! Actuator and rigid-body plant.

use nalgebra::{DMatrix, Vector3};
use tiltrotor_core::{
    build_static_allocation, rk4_step, tilt_step, wrench_from_actuators, ActuatorState, Morphology, RigidBodyState,
    Wrench,
};

use crate::SimError;

/// Morphology with its static allocation matrix.
#[derive(Clone, Debug)]
pub struct Plant {
    pub morphology: Morphology<f64>,
    pub allocation: DMatrix<f64>,
}

impl Plant {
    pub fn new(morphology: &Morphology<f64>) -> Result<Self, SimError> {
        morphology.validate()?;
        Ok(Self { morphology: morphology.clone(), allocation: build_static_allocation(morphology) })
    }

    /// Wrench of the given actuator state.
    pub fn wrench(&self, act: &ActuatorState<f64>) -> Result<Wrench<f64>, SimError> {
        Ok(wrench_from_actuators(&self.allocation, &act.omega, &act.alpha)?)
    }

    /// Moves the actuators toward the references over `dt`: the exact
    /// first-order tilt response and a rate-limited rotor speed.
    pub fn actuate(&self, act: &ActuatorState<f64>, alpha_ref: &[f64], omega_ref: &[f64], dt: f64) -> ActuatorState<f64> {
        let m = &self.morphology;
        let tau = m.tilt.tau;
        let step = m.tilt.rate_limits.omega_dot * dt;
        let alpha = act.alpha.iter().zip(alpha_ref).map(|(a, r)| tilt_step(*a, *r, tau, dt)).collect();
        let omega = act
            .omega
            .iter()
            .zip(omega_ref)
            .map(|(w, r)| (w + (r - w).clamp(-step, step)).clamp(m.rotor.omega_min, m.rotor.omega_max))
            .collect();
        ActuatorState { alpha, omega }
    }

    /// One physics step: actuators first, then the rigid body under the
    /// wrench of the updated actuators.
    pub fn step(
        &self,
        state: &RigidBodyState<f64>,
        act: &ActuatorState<f64>,
        alpha_ref: &[f64],
        omega_ref: &[f64],
        dt: f64,
    ) -> Result<(RigidBodyState<f64>, ActuatorState<f64>), SimError> {
        if !(dt > 0.0) {
            return Err(SimError::Config("physics step must be positive".into()));
        }
        let n = (self.morphology.n_arms(), self.morphology.n_rotors());
        if alpha_ref.len() != n.0 || omega_ref.len() != n.1 || act.alpha.len() != n.0 || act.omega.len() != n.1 {
            return Err(SimError::Config("actuator dimensions do not match the morphology".into()));
        }
        if alpha_ref.iter().chain(omega_ref).any(|x| !x.is_finite()) {
            return Err(SimError::NonFinite("actuator command".into()));
        }
        let next_act = self.actuate(act, alpha_ref, omega_ref, dt);
        let wrench = self.wrench(&next_act)?;
        if !wrench.is_finite() {
            return Err(SimError::NonFinite("wrench".into()));
        }
        let next = rk4_step(state, &wrench, &self.morphology.body, dt).map_err(|e| SimError::NonFinite(e.to_string()))?;
        Ok((next, next_act))
    }

    /// `||sum f_i|| / sum ||f_i||` over the rotor thrust vectors; 1 when
    /// all rotors push the same way, 0 without thrust.
    pub fn force_efficiency(&self, act: &ActuatorState<f64>) -> f64 {
        force_efficiency(&self.allocation, &act.alpha, &act.omega)
    }
}

/// See [`Plant::force_efficiency`].
pub fn force_efficiency(a: &DMatrix<f64>, alpha: &[f64], omega: &[f64]) -> f64 {
    let n = alpha.len();
    let mut net = Vector3::zeros();
    let mut total = 0.0;
    for (j, w) in omega.iter().enumerate() {
        let (s, c) = alpha[j % n].sin_cos();
        let lateral: Vector3<f64> = a.fixed_view::<3, 1>(0, 2 * j).into_owned();
        let vertical: Vector3<f64> = a.fixed_view::<3, 1>(0, 2 * j + 1).into_owned();
        let f = (lateral * s + vertical * c) * (w * w);
        net += f;
        total += f.norm();
    }
    if total > 0.0 {
        net.norm() / total
    } else {
        0.0
    }
}

/// One physics step for a morphology; builds the allocation on each call.
pub fn step_plant(
    state: &RigidBodyState<f64>,
    act: &ActuatorState<f64>,
    alpha_ref: &[f64],
    omega_ref: &[f64],
    morphology: &Morphology<f64>,
    dt: f64,
) -> Result<(RigidBodyState<f64>, ActuatorState<f64>), SimError> {
    Plant::new(morphology)?.step(state, act, alpha_ref, omega_ref, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hover() -> (Plant, ActuatorState<f64>) {
        let m = Morphology::<f64>::prototype();
        let act = ActuatorState::new(vec![0.0; 6], vec![m.hover_speed(); 12]);
        (Plant::new(&m).unwrap(), act)
    }

    #[test]
    fn hover_is_a_fixed_point() {
        let (p, act) = hover();
        let s0 = RigidBodyState::at(Vector3::new(0.0, 0.0, 1.0));
        let (s1, a1) = p.step(&s0, &act, &act.alpha, &act.omega, 1e-3).unwrap();
        assert!((s1.position - s0.position).norm() < 1e-9);
        assert!(s1.velocity.norm() < 1e-9 && s1.angular_velocity.norm() < 1e-9);
        assert!(s1.acceleration.norm() < 1e-9);
        assert_eq!(a1, act);
        assert_relative_eq!(p.force_efficiency(&act), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_thrust_falls_ballistically() {
        let (p, _) = hover();
        let mut act = ActuatorState::new(vec![0.0; 6], vec![0.0; 12]);
        let mut s = RigidBodyState::default();
        for _ in 0..500 {
            (s, act) = p.step(&s, &act, &[0.0; 6], &[0.0; 12], 1e-3).unwrap();
        }
        assert_relative_eq!(s.position.z, -0.5 * 9.81 * 0.25, epsilon = 1e-6);
        assert_eq!(p.force_efficiency(&act), 0.0);
    }

    #[test]
    fn torque_free_spin_conserves_energy_and_momentum() {
        let mut m = Morphology::<f64>::prototype();
        m.body.inertia = Vector3::new(1.0, 2.0, 3.0);
        m.body.g = 0.0;
        let p = Plant::new(&m).unwrap();
        let act = ActuatorState::new(vec![0.0; 6], vec![0.0; 12]);
        let mut s = RigidBodyState::default();
        s.angular_velocity = Vector3::new(0.1, 3.0, 0.1);
        let j = m.body.inertia;
        let energy = |s: &RigidBodyState<f64>| 0.5 * s.angular_velocity.dot(&j.component_mul(&s.angular_velocity));
        let momentum = |s: &RigidBodyState<f64>| s.attitude * j.component_mul(&s.angular_velocity);
        let (e0, h0) = (energy(&s), momentum(&s));
        for _ in 0..10_000 {
            s = p.step(&s, &act, &act.alpha, &act.omega, 1e-3).unwrap().0;
        }
        assert!((energy(&s) - e0).abs() < 1e-6);
        assert!((momentum(&s).norm() - h0.norm()).abs() < 1e-6);
        assert!((momentum(&s) - h0).norm() < 1e-6);
    }

    #[test]
    fn tilt_and_rotor_limits() {
        let (p, act) = hover();
        let next = p.actuate(&act, &[1.0; 6], &[2000.0; 12], 0.05);
        assert_relative_eq!(next.alpha[0], 1.0 - (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(next.omega[0], act.omega[0] + 250.0, epsilon = 1e-9);
        let next = p.actuate(&act, &[1.0; 6], &[2000.0; 12], 0.2);
        assert_relative_eq!(next.omega[0], 1250.0);
        let next = p.actuate(&act, &[0.0; 6], &[0.0; 12], 0.01);
        assert_relative_eq!(next.omega[0], act.omega[0] - 50.0, epsilon = 1e-9);
    }

    #[test]
    fn rejects_nan_commands() {
        let (p, act) = hover();
        let s = RigidBodyState::default();
        let mut bad = act.omega.clone();
        bad[3] = f64::NAN;
        assert!(matches!(p.step(&s, &act, &act.alpha, &bad, 1e-3), Err(SimError::NonFinite(_))));
        assert!(p.step(&s, &act, &act.alpha, &act.omega, 0.0).is_err());
    }

    #[test]
    fn tilted_rotors_lose_efficiency() {
        let (p, mut act) = hover();
        act.alpha = vec![0.5, -0.5, 0.5, -0.5, 0.5, -0.5];
        let eta = p.force_efficiency(&act);
        assert!(eta < 1.0 && eta > 0.5);
    }
}
