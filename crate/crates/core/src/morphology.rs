//! Parametric description of a tiltrotor vehicle.
//!
//! Every arm carries `rotors_per_arm` coaxial rotors that share one active
//! tilt angle about the arm axis. Rotors are numbered layer-major: rotor `j`
//! sits on arm `j % n` in layer `j / n`, so for the six-arm prototype rotors
//! `0..6` are the upper and `6..12` the lower propellers.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::scalar::Real;
use crate::so3::{rot_y, rot_z, RotationSO3};

/// Standard gravity used throughout.
pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct ArmGeometry<T: Real> {
    /// Nominal arm azimuth `gamma` about `z_B` [rad].
    pub gamma: T,
    /// Fixed yaw deviation `theta` from the nominal azimuth [rad].
    #[serde(default)]
    pub theta: T,
    /// Fixed inclination `beta` of the arm out of the body x-y plane [rad].
    #[serde(default)]
    pub beta: T,
    /// Distance from the body origin to the rotor group [m].
    pub length: T,
    /// Spin direction (+1 / -1) of each rotor on the arm, upper first.
    pub spins: Vec<i8>,
}

impl<T: Real> ArmGeometry<T> {
    /// Rotation from the rotor-group frame to the body frame. The rotor
    /// frame `x` axis is the arm (tilt) axis, `z` the thrust direction at
    /// zero tilt.
    pub fn rotor_frame(&self) -> RotationSO3<T> {
        rot_z(self.gamma + self.theta) * rot_y(-self.beta)
    }

    /// Unit vector along the arm.
    pub fn axis(&self) -> Vector3<T> {
        self.rotor_frame() * Vector3::x()
    }

    /// Thrust direction at `alpha = pi/2` (the "lateral" component).
    pub fn lateral_direction(&self) -> Vector3<T> {
        self.rotor_frame() * -Vector3::y()
    }

    /// Thrust direction at `alpha = 0` (the "vertical" component).
    pub fn vertical_direction(&self) -> Vector3<T> {
        self.rotor_frame() * Vector3::z()
    }

    /// Rotor group position in the body frame.
    pub fn position(&self) -> Vector3<T> {
        self.axis() * self.length
    }

    /// Thrust direction for tilt angle `alpha`.
    pub fn thrust_direction(&self, alpha: T) -> Vector3<T> {
        self.lateral_direction() * alpha.sin() + self.vertical_direction() * alpha.cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RotorParams<T: Real> {
    /// Thrust coefficient [N s^2 / rad^2].
    pub c_f: T,
    /// Drag torque to thrust ratio [m]; the drag coefficient is `c_f * c_d`.
    pub c_d: T,
    pub omega_min: T,
    pub omega_max: T,
    pub rotors_per_arm: usize,
}

impl<T: Real> RotorParams<T> {
    /// Drag torque coefficient `c_M = c_f * c_d`.
    pub fn c_m(&self) -> T {
        self.c_f * self.c_d
    }

    /// Largest single-rotor thrust.
    pub fn max_thrust(&self) -> T {
        self.c_f * self.omega_max * self.omega_max
    }

    pub fn omega_sq_max(&self) -> T {
        self.omega_max * self.omega_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RateLimits<T: Real> {
    /// Largest tilt rate [rad/s].
    pub alpha_dot: T,
    /// Largest rotor acceleration [rad/s^2].
    pub omega_dot: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct TiltParams<T: Real> {
    /// First-order tilt time constant [s].
    pub tau: T,
    pub rate_limits: RateLimits<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RigidBodyParams<T: Real> {
    /// Mass [kg].
    pub m: T,
    /// Principal moments of inertia `[J_xx, J_yy, J_zz]` [kg m^2]; products
    /// of inertia are zero by assumption.
    #[serde(rename = "J")]
    pub inertia: Vector3<T>,
    /// Centre of mass offset in the body frame [m].
    #[serde(default = "Vector3::zeros")]
    pub r_com: Vector3<T>,
    /// Magnitude of gravity [m/s^2].
    #[serde(default = "default_gravity")]
    pub g: T,
}

fn default_gravity<T: Real>() -> T {
    T::lit(GRAVITY)
}

impl<T: Real> RigidBodyParams<T> {
    pub fn inertia_matrix(&self) -> Matrix3<T> {
        Matrix3::from_diagonal(&self.inertia)
    }

    /// Gravity acceleration in the world frame (`z` up).
    pub fn gravity_world(&self) -> Vector3<T> {
        Vector3::new(T::zero(), T::zero(), -self.g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > T::zero()) {
            return Err(ModelError::InvalidMorphology("mass must be positive".into()));
        }
        if self.inertia.iter().any(|j| !(*j > T::zero())) {
            return Err(ModelError::SingularInertia);
        }
        Ok(())
    }
}

/// Full parametric vehicle description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Morphology<T: Real> {
    pub arms: Vec<ArmGeometry<T>>,
    pub rotor: RotorParams<T>,
    pub tilt: TiltParams<T>,
    pub body: RigidBodyParams<T>,
}

impl<T: Real> Morphology<T> {
    pub fn n_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn n_rotors(&self) -> usize {
        self.arms.len() * self.rotor.rotors_per_arm
    }

    /// Arm index of rotor `j`.
    #[inline]
    pub fn arm_of_rotor(&self, j: usize) -> usize {
        j % self.arms.len()
    }

    /// Spin sign of rotor `j`.
    pub fn spin_of_rotor(&self, j: usize) -> T {
        let n = self.arms.len();
        if self.arms[j % n].spins[j / n] >= 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(ModelError::InvalidMorphology(msg.to_string()));
        if self.arms.len() < 3 {
            return invalid("at least three arms are required");
        }
        let r = self.rotor.rotors_per_arm;
        if r == 0 {
            return invalid("rotors_per_arm must be at least one");
        }
        let half_pi = T::FRAC_PI_2();
        for (i, arm) in self.arms.iter().enumerate() {
            if !(arm.length > T::zero()) {
                return invalid(&format!("arm {i}: length must be positive"));
            }
            if arm.theta.abs() >= half_pi || arm.beta.abs() >= half_pi {
                return invalid(&format!("arm {i}: |theta| and |beta| must be below pi/2"));
            }
            if arm.spins.len() != r {
                return invalid(&format!("arm {i}: expected {r} spin signs"));
            }
            if arm.spins.iter().any(|s| *s != 1 && *s != -1) {
                return invalid(&format!("arm {i}: spin signs must be +1 or -1"));
            }
        }
        let rotor = &self.rotor;
        if !(rotor.c_f > T::zero()) {
            return invalid("c_f must be positive");
        }
        if !(rotor.omega_min >= T::zero() && rotor.omega_min < rotor.omega_max) {
            return invalid("rotor speed bounds must satisfy 0 <= omega_min < omega_max");
        }
        if !(self.tilt.tau > T::zero())
            || !(self.tilt.rate_limits.alpha_dot > T::zero())
            || !(self.tilt.rate_limits.omega_dot > T::zero())
        {
            return invalid("tilt time constant and rate limits must be positive");
        }
        self.body.validate()
    }

    /// Evenly spaced planar morphology with `n` arms at azimuths
    /// `pi/n * (2i + 1)`, alternating spins between neighbouring arms and
    /// counter-rotating rotors on each arm.
    pub fn symmetric(n: usize, length: T, rotor: RotorParams<T>, tilt: TiltParams<T>, body: RigidBodyParams<T>) -> Self {
        let r = rotor.rotors_per_arm;
        let arms = (0..n)
            .map(|i| {
                let gamma = T::PI() / T::lit(n as f64) * T::lit((2 * i + 1) as f64);
                let first: i8 = if i % 2 == 0 { 1 } else { -1 };
                let spins = (0..r).map(|k| if k % 2 == 0 { first } else { -first }).collect();
                ArmGeometry { gamma, theta: T::zero(), beta: T::zero(), length, spins }
            })
            .collect();
        Morphology { arms, rotor, tilt, body }
    }

    /// The twelve-rotor, six-arm prototype: `l = 0.3 m`, `c_f = 7.1e-6`,
    /// `omega_max = 1250 rad/s`, `m = 4.27 kg`.
    pub fn prototype() -> Self {
        let rotor = RotorParams {
            c_f: T::lit(7.1e-6),
            c_d: T::lit(DEFAULT_DRAG_RATIO),
            omega_min: T::zero(),
            omega_max: T::lit(1250.0),
            rotors_per_arm: 2,
        };
        let tilt = TiltParams {
            tau: T::lit(0.05),
            rate_limits: RateLimits { alpha_dot: T::lit(6.0), omega_dot: T::lit(5000.0) },
        };
        let body = RigidBodyParams {
            m: T::lit(4.27),
            inertia: Vector3::new(T::lit(0.086), T::lit(0.088), T::lit(0.16)),
            r_com: Vector3::zeros(),
            g: T::lit(GRAVITY),
        };
        Self::symmetric(6, T::lit(0.3), rotor, tilt, body)
    }

    /// Returns a copy with per-arm `theta` and `beta` replaced.
    pub fn with_arm_angles(&self, theta: &[T], beta: &[T]) -> Self {
        let mut out = self.clone();
        for (arm, (t, b)) in out.arms.iter_mut().zip(theta.iter().zip(beta)) {
            arm.theta = *t;
            arm.beta = *b;
        }
        out
    }

    /// Rotor speed that balances gravity with all rotors vertical.
    pub fn hover_speed(&self) -> T {
        let thrust = self.body.m * self.body.g / T::lit(self.n_rotors() as f64);
        (thrust / self.rotor.c_f).sqrt()
    }
}

/// Relative drag coefficient used by [`Morphology::prototype`]. Typical for
/// 9 inch propellers; not a measured value.
pub const DEFAULT_DRAG_RATIO: f64 = 0.015;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn prototype_is_valid() {
        let m = Morphology::<f64>::prototype();
        m.validate().unwrap();
        assert_eq!(m.n_rotors(), 12);
        assert_eq!(m.arm_of_rotor(7), 1);
        // counter-rotating pair on every arm, alternating upper spins
        for i in 0..6 {
            assert_eq!(m.spin_of_rotor(i), -m.spin_of_rotor(i + 6));
            assert_eq!(m.spin_of_rotor(i), -m.spin_of_rotor((i + 1) % 6));
        }
    }

    #[test]
    fn arm_directions_are_orthonormal() {
        let m = Morphology::<f64>::prototype().with_arm_angles(&[0.1; 6], &[0.4, -0.4, 0.4, -0.4, 0.4, -0.4]);
        for arm in &m.arms {
            let (e, t, u) = (arm.axis(), arm.lateral_direction(), arm.vertical_direction());
            assert_relative_eq!(e.dot(&t), 0.0, epsilon = 1e-15);
            assert_relative_eq!(e.dot(&u), 0.0, epsilon = 1e-15);
            assert_relative_eq!(t.dot(&u), 0.0, epsilon = 1e-15);
            assert_relative_eq!(arm.axis().z, arm.beta.sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut m = Morphology::<f64>::prototype();
        m.arms.truncate(2);
        assert!(m.validate().is_err());
        let mut m = Morphology::<f64>::prototype();
        m.arms[0].beta = 2.0;
        assert!(m.validate().is_err());
        let mut m = Morphology::<f64>::prototype();
        m.rotor.omega_min = 2000.0;
        assert!(m.validate().is_err());
        let mut m = Morphology::<f64>::prototype();
        m.body.inertia.x = 0.0;
        assert_eq!(m.validate(), Err(ModelError::SingularInertia));
    }

    #[test]
    fn json_schema_round_trip() {
        let m = Morphology::<f64>::prototype();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"rotors_per_arm\":2"));
        assert!(text.contains("\"J\":[0.086,0.088,0.16]"));
        let back: Morphology<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
