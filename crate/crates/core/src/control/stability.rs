//! Sufficient condition for asymptotic stability of the LQRI loop under
//! the attitude-error linearization.

use nalgebra::{SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::error_state::ErrorState;
use super::lqri::LqriGain;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `lambda_min(Q + P B R^-1 B^T P) / (2 ||P||_2)`; positive for any valid
/// weight set.
pub fn stability_margin<T: Real>(gain: &LqriGain<T>) -> T {
    let r_inv = gain.r.try_inverse().expect("R is positive definite");
    let m = gain.q + gain.p * gain.b * r_inv * gain.b.transpose() * gain.p;
    let m = (m + m.transpose()) * T::lit(0.5);
    let lambda_min = SymmetricEigen::new(m).eigenvalues.min();
    let p_norm = SymmetricEigen::new(gain.p).eigenvalues.abs().max();
    lambda_min / (T::lit(2.0) * p_norm)
}

/// `lhs = (3 + sqrt 2) / sqrt 2 * ||e_omega|| / ||e||` compared against the
/// margin. A zero error counts as satisfied.
pub fn stability_condition<T: Real>(margin: T, e: &ErrorState<T>) -> StabilityCheck {
    let norm = e.to_vector().norm();
    let rhs = margin.to_f64();
    if norm == T::zero() {
        return StabilityCheck { lhs: 0.0, rhs, satisfied: true };
    }
    let lhs = stability_lhs(&e.e_omega, norm).to_f64();
    StabilityCheck { lhs, rhs, satisfied: lhs < rhs }
}

fn stability_lhs<T: Real>(e_omega: &Vector3<T>, e_norm: T) -> T {
    let sqrt2 = T::SQRT_2();
    (T::lit(3.0) + sqrt2) / sqrt2 * e_omega.norm() / e_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::lqri::LqriWeights;
    use approx::assert_relative_eq;

    #[test]
    fn margin_is_positive() {
        let g = LqriGain::new(&LqriWeights::<f64>::paper()).unwrap();
        assert!(stability_margin(&g) > 0.0);
    }

    #[test]
    fn no_rate_error_is_satisfied() {
        let mut e = ErrorState::<f64>::default();
        e.e_p = Vector3::new(1.0, 0.0, 0.0);
        let c = stability_condition(0.1, &e);
        assert_eq!(c.lhs, 0.0);
        assert!(c.satisfied);
        assert!(stability_condition(0.1, &ErrorState::<f64>::default()).satisfied);
    }

    #[test]
    fn pure_rate_error_constant() {
        let mut e = ErrorState::<f64>::default();
        e.e_omega = Vector3::new(0.0, 0.3, 0.4);
        let c = stability_condition(0.1, &e);
        assert_relative_eq!(c.lhs, (3.0 + 2f64.sqrt()) / 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(c.lhs, 3.1213203, epsilon = 1e-6);
        assert!(!c.satisfied);
    }
}
