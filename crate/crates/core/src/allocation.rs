//! Rotor wrench model and the static / instantaneous allocation matrices.
//!
//! The static matrix maps the interleaved lateral and vertical components
//! of the squared rotor speeds, `[sin(a) W_0, cos(a) W_0, sin(a) W_1, ...]`,
//! linearly onto the body wrench `[f; tau]`.

use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::morphology::{Morphology, RotorParams};
use crate::scalar::Real;

/// Force and torque acting on the body, both in body coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Wrench<T: Real> {
    pub force: Vector3<T>,
    pub torque: Vector3<T>,
}

impl<T: Real> Wrench<T> {
    pub fn new(force: Vector3<T>, torque: Vector3<T>) -> Self {
        Self { force, torque }
    }

    pub fn zero() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    pub fn from_vector(w: &Vector6<T>) -> Self {
        Self::new(w.fixed_rows::<3>(0).into(), w.fixed_rows::<3>(3).into())
    }

    pub fn from_slice(w: &[T]) -> Self {
        Self::new(Vector3::new(w[0], w[1], w[2]), Vector3::new(w[3], w[4], w[5]))
    }

    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(
            self.force.x, self.force.y, self.force.z, self.torque.x, self.torque.y, self.torque.z,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|x| x.is_finite())
    }
}

/// Thrust and drag torque magnitudes of one rotor spinning at `omega`.
pub fn rotor_wrench<T: Real>(omega: T, params: &RotorParams<T>) -> Result<(T, T)> {
    if omega < T::zero() {
        return Err(ModelError::Domain(format!("negative rotor speed {}", omega.to_f64())));
    }
    let w2 = omega * omega;
    Ok((params.c_f * w2, params.c_m() * w2))
}

/// Static allocation matrix, `6 x 2 n_r`. Columns `2j` and `2j + 1` hold the
/// lateral and vertical contribution of rotor `j`.
pub fn build_static_allocation<T: Real>(m: &Morphology<T>) -> DMatrix<T> {
    let n_r = m.n_rotors();
    let c_f = m.rotor.c_f;
    let c_d = m.rotor.c_d;
    let mut a = DMatrix::zeros(6, 2 * n_r);
    for j in 0..n_r {
        let arm = &m.arms[m.arm_of_rotor(j)];
        let s = m.spin_of_rotor(j);
        let r = arm.position();
        for (k, d) in [arm.lateral_direction(), arm.vertical_direction()].iter().enumerate() {
            let torque = r.cross(d) - d * (s * c_d);
            let col = 2 * j + k;
            a.fixed_view_mut::<3, 1>(0, col).copy_from(&(d * c_f));
            a.fixed_view_mut::<3, 1>(3, col).copy_from(&(torque * c_f));
        }
    }
    a
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(ModelError::Dimension { expected, got });
    }
    Ok(())
}

/// Interleaved lateral / vertical components of the squared rotor speeds.
/// Rotor `j` uses the tilt of arm `j % n_arms`.
pub fn omega_tilde<T: Real>(omega_sq: &[T], alpha: &[T]) -> Result<DVector<T>> {
    let n = alpha.len();
    if n == 0 || omega_sq.len() % n != 0 {
        return Err(ModelError::Dimension { expected: n.max(1), got: omega_sq.len() });
    }
    let mut out = DVector::zeros(2 * omega_sq.len());
    for (j, w) in omega_sq.iter().enumerate() {
        let (s, c) = alpha[j % n].sin_cos();
        out[2 * j] = s * *w;
        out[2 * j + 1] = c * *w;
    }
    Ok(out)
}

/// Tilt-dependent allocation `A_alpha` with `A_alpha * W = A * omega_tilde(W, alpha)`.
pub fn instantaneous_allocation<T: Real>(a: &DMatrix<T>, alpha: &[T]) -> Result<DMatrix<T>> {
    let n = alpha.len();
    let n_r = a.ncols() / 2;
    if n == 0 || a.ncols() % 2 != 0 || n_r % n != 0 {
        return Err(ModelError::Dimension { expected: n, got: n_r });
    }
    let mut out = DMatrix::zeros(6, n_r);
    for j in 0..n_r {
        let (s, c) = alpha[j % n].sin_cos();
        let col = a.column(2 * j) * s + a.column(2 * j + 1) * c;
        out.set_column(j, &col);
    }
    Ok(out)
}

/// Body wrench produced by rotor speeds `omega` at tilt angles `alpha`.
pub fn wrench_from_actuators<T: Real>(a: &DMatrix<T>, omega: &[T], alpha: &[T]) -> Result<Wrench<T>> {
    check_len(a.ncols() / 2, omega.len())?;
    let sq: Vec<T> = omega.iter().map(|w| *w * *w).collect();
    let w = a * omega_tilde(&sq, alpha)?;
    Ok(Wrench::from_slice(w.as_slice()))
}

/// Relative threshold below which the smallest singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Spectral condition number `sigma_max / sigma_min`. Returns `+inf` for a
/// rank deficient (or zero) matrix.
pub fn condition_number<T: Real>(a: &DMatrix<T>) -> T {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let min = sv.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    if max <= T::zero() || min < T::lit(RANK_TOLERANCE) * max {
        return T::max_value().unwrap() * T::lit(2.0);
    }
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::Morphology;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn hex(c_d: f64) -> Morphology<f64> {
        let mut m = Morphology::prototype();
        m.rotor.c_d = c_d;
        m
    }

    /// Column for a single rotor written out entry by entry from the
    /// closed-form matrix (arm azimuth g, inclination b, length l, spin s).
    fn closed_form_columns(g: f64, b: f64, l: f64, s: f64, c_d: f64) -> [[f64; 6]; 2] {
        let (sg, cg, sb, cb) = (g.sin(), g.cos(), b.sin(), b.cos());
        let lateral = [
            sg,
            -cg,
            0.0,
            -s * c_d * sg + l * sb * cg,
            s * c_d * cg + l * sb * sg,
            -l * cb,
        ];
        let vertical = [
            -sb * cg,
            -sb * sg,
            cb,
            l * sg + s * c_d * sb * cg,
            -l * cg + s * c_d * sb * sg,
            -s * c_d * cb,
        ];
        [lateral, vertical]
    }

    #[test]
    fn rotor_wrench_values() {
        let p = Morphology::<f64>::prototype().rotor;
        let (f, _) = rotor_wrench(1250.0, &p).unwrap();
        assert_relative_eq!(f, 11.09375, epsilon = 1e-12);
        assert_eq!(rotor_wrench(0.0, &p).unwrap(), (0.0, 0.0));
        assert_relative_eq!(rotor_wrench(500.0, &p).unwrap().0, 1.775, epsilon = 1e-12);
        let (f, t) = rotor_wrench(800.0, &p).unwrap();
        assert_relative_eq!(t, f * p.c_d, epsilon = 1e-15);
        assert!(matches!(rotor_wrench(-1.0, &p), Err(ModelError::Domain(_))));
    }

    #[test]
    fn static_matrix_matches_closed_form() {
        let betas = [0.3, -0.6, 0.1, 0.0, -0.2, 0.5];
        let thetas = [0.05, -0.1, 0.2, 0.0, 0.1, -0.3];
        let m = hex(0.015).with_arm_angles(&thetas, &betas);
        let a = build_static_allocation(&m);
        assert_eq!(a.shape(), (6, 24));
        for j in 0..12 {
            let arm = &m.arms[j % 6];
            let cols = closed_form_columns(
                arm.gamma + arm.theta,
                arm.beta,
                arm.length,
                m.spin_of_rotor(j),
                m.rotor.c_d,
            );
            for k in 0..2 {
                for r in 0..6 {
                    assert_relative_eq!(a[(r, 2 * j + k)], m.rotor.c_f * cols[k][r], epsilon = 1e-18);
                }
            }
        }
    }

    #[test]
    fn vertical_column_of_rotor_at_quarter_turn() {
        let mut m = hex(0.015);
        m.arms[0].gamma = FRAC_PI_2;
        let a = build_static_allocation(&m);
        let f = a.fixed_view::<3, 1>(0, 1);
        assert_relative_eq!(f.into_owned(), Vector3::new(0.0, 0.0, 7.1e-6), epsilon = 1e-20);
        for c in 0..24 {
            assert_relative_eq!(a.fixed_view::<3, 1>(0, c).norm(), 7.1e-6, epsilon = 1e-18);
        }
        let a0 = build_static_allocation(&hex(0.0));
        for j in 0..12 {
            assert_eq!(a0[(5, 2 * j + 1)], 0.0);
        }
    }

    #[test]
    fn omega_tilde_pairs() {
        let w = omega_tilde(&[1.0, 1.0], &[0.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.0, 1.0, 0.0, 1.0]);
        let w = omega_tilde(&[4.0], &[FRAC_PI_2]).unwrap();
        assert_relative_eq!(w[0], 4.0);
        assert_relative_eq!(w[1], 0.0, epsilon = 1e-15);
        let w = omega_tilde(&[2.0], &[FRAC_PI_4]).unwrap();
        assert_relative_eq!(w[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[1], 2f64.sqrt(), epsilon = 1e-15);
        assert!(omega_tilde(&[1.0, 2.0, 3.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn instantaneous_matrix_rows() {
        let a = build_static_allocation(&hex(0.0));
        let a0 = instantaneous_allocation(&a, &[0.0; 6]).unwrap();
        assert_eq!(a0.shape(), (6, 12));
        assert!(a0.rows(0, 2).abs().max() < 1e-20);
        let a90 = instantaneous_allocation(&a, &[FRAC_PI_2; 6]).unwrap();
        assert!(a90.row(2).abs().max() < 1e-20);
    }

    #[test]
    fn instantaneous_consistent_with_static() {
        let m = hex(0.015).with_arm_angles(&[0.1; 6], &[0.6, -0.6, 0.6, -0.6, 0.6, -0.6]);
        let a = build_static_allocation(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let alpha: Vec<f64> = (0..6).map(|_| rng.gen_range(-7.0..7.0)).collect();
            let sq: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..1.6e6)).collect();
            let lhs = &a * omega_tilde(&sq, &alpha).unwrap();
            let rhs = instantaneous_allocation(&a, &alpha).unwrap() * DVector::from_column_slice(&sq);
            assert!((lhs - &rhs).norm() <= 1e-12 * rhs.norm());
        }
    }

    #[test]
    fn condition_number_cases() {
        assert_relative_eq!(condition_number(&DMatrix::<f64>::identity(6, 6)), 1.0, epsilon = 1e-12);
        assert!(condition_number(&DMatrix::<f64>::zeros(6, 12)).is_infinite());
        let a = build_static_allocation(&hex(0.0));
        let a0 = instantaneous_allocation(&a, &[0.0; 6]).unwrap();
        assert!(condition_number(&a0).is_infinite());
        let a1 = instantaneous_allocation(&a, &[0.3, -0.2, 0.1, 0.4, -0.5, 0.2]).unwrap();
        assert_relative_eq!(condition_number(&a1), condition_number(&(a1.clone() * 3.0)), max_relative = 1e-10);
    }

    #[test]
    fn hover_wrench() {
        let m = Morphology::<f64>::prototype();
        let a = build_static_allocation(&m);
        let w = wrench_from_actuators(&a, &[m.hover_speed(); 12], &[0.0; 6]).unwrap();
        assert_relative_eq!(w.force, Vector3::new(0.0, 0.0, m.body.m * 9.81), epsilon = 1e-10);
        assert!(w.torque.norm() < 1e-12);
    }
}
