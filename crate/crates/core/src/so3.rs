//! SO(3) helpers: hat/vee maps, elementary rotations and the geometric
//! attitude error.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{ModelError, Result};
use crate::scalar::Real;

/// Rotation matrix constrained to SO(3).
pub type RotationSO3<T> = Rotation3<T>;

/// Tolerance used by the checked conversions in this module.
pub const SO3_TOLERANCE: f64 = 1e-9;

/// Skew-symmetric matrix `[v]x` such that `skew(v) * w == v.cross(w)`.
#[inline]
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Inverse of [`skew`]. Fails when `m` is not antisymmetric within
/// [`SO3_TOLERANCE`] (scaled by the matrix magnitude).
pub fn vee<T: Real>(m: &Matrix3<T>) -> Result<Vector3<T>> {
    let asym = (m + m.transpose()).abs().max();
    let scale = T::one().max(m.abs().max());
    if asym > T::lit(SO3_TOLERANCE) * scale {
        return Err(ModelError::NotAntisymmetric(asym.to_f64()));
    }
    Ok(vee_unchecked(m))
}

/// Extracts the axial vector of the antisymmetric part of `m`.
#[inline]
pub fn vee_unchecked<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    let half = T::lit(0.5);
    Vector3::new(
        half * (m[(2, 1)] - m[(1, 2)]),
        half * (m[(0, 2)] - m[(2, 0)]),
        half * (m[(1, 0)] - m[(0, 1)]),
    )
}

pub fn rot_x<T: Real>(angle: T) -> RotationSO3<T> {
    Rotation3::from_axis_angle(&Vector3::x_axis(), angle)
}

pub fn rot_y<T: Real>(angle: T) -> RotationSO3<T> {
    Rotation3::from_axis_angle(&Vector3::y_axis(), angle)
}

pub fn rot_z<T: Real>(angle: T) -> RotationSO3<T> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), angle)
}

/// Exponential map of a rotation vector.
#[inline]
pub fn exp_map<T: Real>(phi: &Vector3<T>) -> RotationSO3<T> {
    Rotation3::new(*phi)
}

/// Logarithm map, returning the rotation vector with angle in `[0, pi]`.
#[inline]
pub fn log_map<T: Real>(r: &RotationSO3<T>) -> Vector3<T> {
    r.scaled_axis()
}

/// Builds a rotation from a raw matrix, checking `R^T R = I` and `det R = 1`.
pub fn rotation_from_matrix<T: Real>(m: Matrix3<T>) -> Result<RotationSO3<T>> {
    let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
    let det = m.determinant();
    let tol = T::lit(SO3_TOLERANCE);
    if orth > tol || (det - T::one()).abs() > tol {
        return Err(ModelError::NotRotation {
            orthogonality: orth.to_f64(),
            det: det.to_f64(),
        });
    }
    Ok(Rotation3::from_matrix_unchecked(m))
}

/// Largest deviation from orthonormality and from unit determinant.
pub fn rotation_defect<T: Real>(r: &RotationSO3<T>) -> (T, T) {
    let m = r.matrix();
    let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
    (orth, (m.determinant() - T::one()).abs())
}

/// Geometric attitude error `e_R = 1/2 vee(R_d^T R - R^T R_d)`, expressed in
/// the body frame of `r`.
pub fn attitude_error<T: Real>(r: &RotationSO3<T>, r_d: &RotationSO3<T>) -> Vector3<T> {
    let rd_t_r = r_d.matrix().transpose() * r.matrix();
    let m = rd_t_r - rd_t_r.transpose();
    vee_unchecked(&m) * T::lit(0.5)
}

/// `A_RΩ(R, R_d) = 1/2 (tr(R^T R_d) I - R^T R_d)`, the map from angular
/// velocity error to attitude error rate.
pub fn attitude_error_rate_map<T: Real>(r: &RotationSO3<T>, r_d: &RotationSO3<T>) -> Matrix3<T> {
    let rt_rd = r.matrix().transpose() * r_d.matrix();
    (Matrix3::identity() * rt_rd.trace() - rt_rd) * T::lit(0.5)
}
