//! Parametric mass and inertia model: a cylindrical core, tube arms and
//! cylindrical rotor groups whose transverse inertia is averaged over tilt.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use tiltrotor_core::so3::{rot_y, rot_z};
use tiltrotor_core::ArmGeometry;

use crate::DesignError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassModel {
    /// Constant core mass (autonomy payload) [kg].
    pub m_c_const: f64,
    /// Core mass added per arm for tilt actuation [kg].
    pub m_a: f64,
    /// Mass of one rotor group [kg].
    pub m_r: f64,
    /// Arm tube mass per unit length [kg/m].
    pub m_t_norm: f64,
    pub r_c: f64,
    pub h_c: f64,
    /// Inner and outer tube radii [m].
    pub r_1: f64,
    pub r_2: f64,
    pub r_r: f64,
    pub h_r: f64,
}

impl Default for MassModel {
    /// Calibrated constants: total mass 4.0 kg and `J_zz = 0.1439 kg m^2`
    /// for six flat arms of 0.3 m (see [`calibrate`]).
    fn default() -> Self {
        calibrate(&MassModel::uncalibrated(), 6, 0.3, CALIBRATION_MASS, CALIBRATION_J_ZZ)
            .expect("default calibration is well posed")
            .model
    }
}

/// Calibration target mass [kg].
pub const CALIBRATION_MASS: f64 = 4.0;
/// Calibration target yaw inertia [kg m^2].
pub const CALIBRATION_J_ZZ: f64 = 0.1439;

impl MassModel {
    /// Geometric constants with placeholder masses for `m_r` and `m_c_const`.
    pub fn uncalibrated() -> Self {
        Self {
            m_c_const: 1.5,
            m_a: 0.1,
            m_r: 0.2,
            m_t_norm: 0.1,
            r_c: 0.1,
            h_c: 0.1,
            r_1: 0.009,
            r_2: 0.01,
            r_r: 0.12,
            h_r: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let all = [
            self.m_c_const, self.m_a, self.m_r, self.m_t_norm, self.r_c, self.h_c, self.r_1, self.r_2, self.r_r, self.h_r,
        ];
        if all.iter().any(|x| !(*x > 0.0)) {
            return Err(DesignError::Invalid("mass model constants must be positive".into()));
        }
        Ok(())
    }
}

fn cylinder(m: f64, r: f64, h: f64) -> Vector3<f64> {
    let t = m * (3.0 * r * r + h * h) / 12.0;
    Vector3::new(t, t, 0.5 * m * r * r)
}

fn parallel_axis(j: Matrix3<f64>, m: f64, p: &Vector3<f64>) -> Matrix3<f64> {
    j + (Matrix3::identity() * p.norm_squared() - p * p.transpose()) * m
}

/// Total mass and body inertia about the body origin.
pub fn compute_mass_inertia(arms: &[ArmGeometry<f64>], mm: &MassModel) -> (f64, Matrix3<f64>) {
    let n = arms.len() as f64;
    let m_c = mm.m_c_const + n * mm.m_a;
    let mut m = m_c;
    let mut j = Matrix3::from_diagonal(&cylinder(m_c, mm.r_c, mm.h_c));
    let r2 = mm.r_1 * mm.r_1 + mm.r_2 * mm.r_2;
    for arm in arms {
        let l = arm.length;
        let m_t = mm.m_t_norm * l;
        let tube_t = m_t * (3.0 * r2 + l * l) / 12.0;
        let j_t = Matrix3::from_diagonal(&Vector3::new(0.5 * m_t * r2, tube_t, tube_t));
        let rotor = cylinder(mm.m_r, mm.r_r, mm.h_r);
        let avg = 0.5 * (rotor.x + rotor.z);
        let j_r = Matrix3::from_diagonal(&Vector3::new(rotor.x, avg, avg));
        let local = parallel_axis(j_t, m_t, &Vector3::new(0.5 * l, 0.0, 0.0))
            + parallel_axis(j_r, mm.m_r, &Vector3::new(l, 0.0, 0.0));
        let rot = (rot_z(arm.gamma + arm.theta) * rot_y(-arm.beta)).into_inner();
        j += rot * local * rot.transpose();
        m += mm.m_r + m_t;
    }
    (m, j)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    pub model: MassModel,
    pub mass: f64,
    pub inertia: [f64; 3],
}

fn flat_arms(n: usize, length: f64) -> Vec<ArmGeometry<f64>> {
    (0..n)
        .map(|i| ArmGeometry {
            gamma: std::f64::consts::PI / n as f64 * (2 * i + 1) as f64,
            theta: 0.0,
            beta: 0.0,
            length,
            spins: vec![1],
        })
        .collect()
}

/// Solves for `m_r` and `m_c_const` so that `n` flat arms of `length`
/// reach `mass` and `j_zz`; all other constants are kept. Both quantities
/// are affine in the two unknowns.
pub fn calibrate(base: &MassModel, n: usize, length: f64, mass: f64, j_zz: f64) -> Result<Calibration, DesignError> {
    let arms = flat_arms(n, length);
    let eval = |m_c_const: f64, m_r: f64| {
        let mm = MassModel { m_c_const, m_r, ..base.clone() };
        let (m, j) = compute_mass_inertia(&arms, &mm);
        Vector2::new(m, j[(2, 2)])
    };
    let f0 = eval(0.0, 0.0);
    let jac = Matrix2::from_columns(&[eval(1.0, 0.0) - f0, eval(0.0, 1.0) - f0]);
    let x = jac
        .try_inverse()
        .ok_or_else(|| DesignError::Invalid("calibration is singular".into()))?
        * (Vector2::new(mass, j_zz) - f0);
    let model = MassModel { m_c_const: x[0], m_r: x[1], ..base.clone() };
    model.validate()?;
    let (m, j) = compute_mass_inertia(&arms, &model);
    Ok(Calibration { model, mass: m, inertia: [j[(0, 0)], j[(1, 1)], j[(2, 2)]] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn degenerate_geometry_is_core_cylinder() {
        let mm = MassModel { m_r: 1e-12, m_t_norm: 1e-12, ..MassModel::uncalibrated() };
        let (m, j) = compute_mass_inertia(&flat_arms(6, 1e-9), &mm);
        let m_c = mm.m_c_const + 6.0 * mm.m_a;
        assert_relative_eq!(m, m_c, epsilon = 1e-9);
        assert_relative_eq!(Vector3::new(j[(0, 0)], j[(1, 1)], j[(2, 2)]), cylinder(m_c, mm.r_c, mm.h_c), epsilon = 1e-9);
    }

    #[test]
    fn planar_arms_dominate() {
        let mm = MassModel { m_c_const: 1e-6, m_a: 1e-6, ..MassModel::uncalibrated() };
        let (_, j) = compute_mass_inertia(&flat_arms(6, 0.3), &mm);
        assert_relative_eq!(j[(2, 2)] / j[(0, 0)], 2.0, max_relative = 0.05);
        assert!(j[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn calibration_hits_targets() {
        let c = calibrate(&MassModel::uncalibrated(), 6, 0.3, 4.0, 0.1439).unwrap();
        assert_relative_eq!(c.mass, 4.0, epsilon = 1e-12);
        assert_relative_eq!(c.inertia[2], 0.1439, epsilon = 1e-12);
        assert_relative_eq!(c.inertia[0], c.inertia[1], epsilon = 1e-12);
        assert_eq!(MassModel::default(), c.model);
    }

    #[test]
    fn inclined_arms_raise_roll_inertia() {
        let mm = MassModel::default();
        let mut arms = flat_arms(6, 0.3);
        let (_, flat) = compute_mass_inertia(&arms, &mm);
        for (i, arm) in arms.iter_mut().enumerate() {
            arm.beta = if i % 2 == 0 { 0.6154 } else { -0.6154 };
        }
        let (_, tilted) = compute_mass_inertia(&arms, &mm);
        assert!(tilted[(0, 0)] > flat[(0, 0)]);
        assert!(tilted[(2, 2)] < flat[(2, 2)]);
        assert_relative_eq!(tilted.trace(), flat.trace(), max_relative = 1e-12);
    }
}
