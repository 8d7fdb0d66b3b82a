//! Continuous-time algebraic Riccati and Lyapunov equations.
//!
//! CARE: `A^T P + P A - P B R^-1 B^T P + Q = 0`, solved with the matrix sign
//! function of the Hamiltonian followed by Newton refinement.

use nalgebra::DMatrix;

use crate::error::{ModelError, Result};
use crate::scalar::Real;

const MAX_SIGN_ITERATIONS: usize = 100;
const MAX_REFINEMENTS: usize = 4;

fn check_square<T: Real>(m: &DMatrix<T>, n: usize, name: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(ModelError::Dimension { expected: n, got: m.nrows().max(m.ncols()) });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::Numerical(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn inverse<T: Real>(m: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| ModelError::Numerical(format!("{what} is singular")))
}

/// `|det m|^(1/n)` via the LU factors, computed in log space.
fn det_root<T: Real>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let lu = m.clone().lu();
    let u = lu.u();
    let log_sum = (0..n).fold(T::zero(), |acc, i| acc + u[(i, i)].abs().ln());
    (log_sum / T::lit(n as f64)).exp()
}

fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.norm()
}

/// Matrix sign function by the scaled Newton iteration.
pub fn matrix_sign<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let half = T::lit(0.5);
    let tol = T::lit(100.0) * T::default_epsilon() * T::lit(m.nrows() as f64);
    let mut z = m.clone();
    for _ in 0..MAX_SIGN_ITERATIONS {
        let z_inv = inverse(&z, "sign iterate")?;
        let c = det_root(&z);
        if !(c.is_finite() && c > T::zero()) {
            return Err(ModelError::Numerical("sign iteration lost rank".into()));
        }
        let next = (&z / c + &z_inv * c) * half;
        let change = frobenius(&(&next - &z));
        let scale = frobenius(&next);
        z = next;
        if change <= tol.sqrt() * scale {
            // one unscaled step squares the remaining error
            let z_inv = inverse(&z, "sign iterate")?;
            return Ok((&z + z_inv) * half);
        }
    }
    Err(ModelError::Numerical("sign iteration did not converge".into()))
}

/// Solves `A^T X + X A + M = 0` for Hurwitz `A` with the sign iteration on
/// the pair `(A, M)`.
pub fn solve_lyapunov<T: Real>(a: &DMatrix<T>, m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    check_square(a, n, "A")?;
    check_square(m, n, "M")?;
    let half = T::lit(0.5);
    let tol = T::lit(100.0) * T::default_epsilon() * T::lit(n as f64);
    let mut ak = a.clone();
    let mut mk = m.clone();
    for _ in 0..MAX_SIGN_ITERATIONS {
        let a_inv = inverse(&ak, "Lyapunov iterate")?;
        let c = det_root(&ak);
        let next_a = (&ak / c + &a_inv * c) * half;
        let next_m = (&mk / c + a_inv.transpose() * &mk * &a_inv * c) * half;
        let change = frobenius(&(&next_a - &ak)) / frobenius(&next_a);
        ak = next_a;
        mk = next_m;
        if change <= tol.sqrt() {
            let a_inv = inverse(&ak, "Lyapunov iterate")?;
            mk = (&mk + a_inv.transpose() * &mk * &a_inv) * half;
            ak = (&ak + a_inv) * half;
            let x = &mk * half;
            let identity_gap = frobenius(&(&ak + DMatrix::identity(n, n)));
            if identity_gap > T::lit(1e-6) * T::lit(n as f64) {
                return Err(ModelError::Numerical("Lyapunov operator is not Hurwitz".into()));
            }
            return Ok((&x + x.transpose()) * half);
        }
    }
    Err(ModelError::Numerical("Lyapunov sign iteration did not converge".into()))
}

/// Riccati residual `A^T P + P A - P B R^-1 B^T P + Q`.
pub fn care_residual<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
    p: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let r_inv = inverse(r, "R")?;
    Ok(a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q)
}

/// Largest real part of the eigenvalues of `m`.
pub fn spectral_abscissa<T: Real>(m: &DMatrix<T>) -> T {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(T::min_value().unwrap(), |a, b| a.max(b))
}

/// Stabilizing solution of the CARE.
pub fn solve_care<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    q: &DMatrix<T>,
    r: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let m = b.ncols();
    check_square(a, n, "A")?;
    check_square(q, n, "Q")?;
    check_square(r, m, "R")?;
    if b.nrows() != n {
        return Err(ModelError::Dimension { expected: n, got: b.nrows() });
    }
    let r_inv = inverse(r, "R")?;
    let g = b * &r_inv * b.transpose();

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let w = matrix_sign(&h).map_err(|e| ModelError::NotStabilizable(e.to_string()))?;
    let id = DMatrix::<T>::identity(n, n);
    let mut lhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n)).copy_from(&(w.view((n, n), (n, n)) + &id));
    let mut rhs = DMatrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(w.view((0, 0), (n, n)) + &id));
    rhs.view_mut((n, 0), (n, n)).copy_from(&w.view((n, 0), (n, n)));
    let normal = lhs.transpose() * &lhs;
    let p = -(inverse(&normal, "stable subspace basis")
        .map_err(|e| ModelError::NotStabilizable(e.to_string()))?
        * lhs.transpose()
        * rhs);
    let mut p = (&p + p.transpose()) * T::lit(0.5);

    // Newton refinement
    let target = T::lit(1e-3) * T::default_epsilon().sqrt() * frobenius(q).max(T::one());
    for _ in 0..MAX_REFINEMENTS {
        let res = care_residual(a, b, q, r, &p)?;
        if frobenius(&res) <= target {
            break;
        }
        let ac = a - &g * &p;
        let delta = solve_lyapunov(&ac, &res).map_err(|e| ModelError::NotStabilizable(e.to_string()))?;
        p += delta;
        p = (&p + p.transpose()) * T::lit(0.5);
    }

    let closed = a - &g * &p;
    if spectral_abscissa(&closed) >= T::zero() {
        return Err(ModelError::NotStabilizable("closed loop is not Hurwitz".into()));
    }
    Ok(p)
}

/// Optimal state feedback gain `K = R^-1 B^T P`.
pub fn lqr_gain<T: Real>(p: &DMatrix<T>, b: &DMatrix<T>, r: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(inverse(r, "R")? * b.transpose() * p)
}
