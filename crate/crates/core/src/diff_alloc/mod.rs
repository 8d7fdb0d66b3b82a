//! Differential actuator allocation: maps body wrench rates to rotor
//! accelerations and tilt rates through a weighted minimum-deviation
//! solution, using the null space to pull actuators toward efficient and
//! unwound configurations.

mod allocator;
mod scan;
mod targets;

pub use allocator::{
    saturate_integrate, ActuatorCommand, AllocationStep, AllocatorConfig, DifferentialAllocator,
};
pub use scan::{condition_scan, ConditionScan};
pub use targets::{alpha_bias, optimal_targets, BiasConfig, OptimalTargets, UnwindConfig};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::scalar::Real;

/// Condition number of `A M A^T` above which the solve is regularized.
pub const REGULARIZATION_THRESHOLD: f64 = 1e12;
/// Tikhonov factor, relative to `trace(A M A^T) / 6`.
pub const REGULARIZATION_FACTOR: f64 = 1e-9;

/// How the weight enters the closed-form solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightForm {
    /// `M = (W^T W)^-1`: the solution minimizes `||W (u - u*)||`.
    #[default]
    Objective,
    /// `M = W` inserted directly into `u* + M A^T (A M A^T)^-1 r`.
    Literal,
}

/// Differential allocation matrices at one operating point.
#[derive(Clone, Debug)]
pub struct DiffAllocation<T: Real> {
    /// `A~ = A dA`, `6 x (n_r + n)`.
    pub a_tilde: DMatrix<T>,
    /// Chain-rule Jacobian of the lateral/vertical components with respect
    /// to `[omega; alpha]`, `2 n_r x (n_r + n)`.
    pub delta_a: DMatrix<T>,
    /// Diagonal of the weight `W`.
    pub weight: DVector<T>,
    pub form: WeightForm,
}

/// Diagonal of the default weight `blkdiag(I_{n_r}, k_alpha I_n)`.
pub fn default_weight<T: Real>(n_rotors: usize, n_arms: usize, k_alpha: T) -> DVector<T> {
    DVector::from_fn(n_rotors + n_arms, |i, _| if i < n_rotors { T::one() } else { k_alpha })
}

/// Jacobian of `omega_tilde(omega^2, alpha)` with respect to `[omega; alpha]`.
pub fn chain_rule_jacobian<T: Real>(omega: &[T], alpha: &[T]) -> Result<DMatrix<T>> {
    let (n_r, n) = (omega.len(), alpha.len());
    if n == 0 || n_r % n != 0 {
        return Err(ModelError::Dimension { expected: n, got: n_r });
    }
    let two = T::lit(2.0);
    let mut d = DMatrix::zeros(2 * n_r, n_r + n);
    for (j, w) in omega.iter().copied().enumerate() {
        let arm = j % n;
        let (s, c) = alpha[arm].sin_cos();
        d[(2 * j, j)] = two * w * s;
        d[(2 * j, n_r + arm)] = w * w * c;
        d[(2 * j + 1, j)] = two * w * c;
        d[(2 * j + 1, n_r + arm)] = -w * w * s;
    }
    Ok(d)
}

impl<T: Real> DiffAllocation<T> {
    pub fn new(a: &DMatrix<T>, omega: &[T], alpha: &[T], weight: DVector<T>, form: WeightForm) -> Result<Self> {
        if a.ncols() != 2 * omega.len() {
            return Err(ModelError::Dimension { expected: a.ncols() / 2, got: omega.len() });
        }
        if weight.len() != omega.len() + alpha.len() {
            return Err(ModelError::Dimension { expected: omega.len() + alpha.len(), got: weight.len() });
        }
        if weight.iter().any(|w| !(*w > T::zero())) {
            return Err(ModelError::Domain("weights must be positive".into()));
        }
        let delta_a = chain_rule_jacobian(omega, alpha)?;
        Ok(Self { a_tilde: a * &delta_a, delta_a, weight, form })
    }

    pub fn n_inputs(&self) -> usize {
        self.weight.len()
    }

    /// Diagonal of the metric `M` used in the solution.
    pub fn metric(&self) -> DVector<T> {
        match self.form {
            WeightForm::Objective => self.weight.map(|w| T::one() / (w * w)),
            WeightForm::Literal => self.weight.clone(),
        }
    }

    /// `u = u* + M A~^T (A~ M A~^T)^-1 (wdot - A~ u*)`. Returns the solution
    /// and whether the inner matrix had to be regularized.
    pub fn solve(&self, u_star: &DVector<T>, w_dot: &DVector<T>) -> Result<(DVector<T>, bool)> {
        if u_star.len() != self.n_inputs() {
            return Err(ModelError::Dimension { expected: self.n_inputs(), got: u_star.len() });
        }
        if w_dot.len() != 6 {
            return Err(ModelError::Dimension { expected: 6, got: w_dot.len() });
        }
        let m = self.metric();
        let mut am = self.a_tilde.clone();
        for (k, mk) in m.iter().enumerate() {
            am.column_mut(k).scale_mut(*mk);
        }
        let mut inner = &am * self.a_tilde.transpose();
        let residual = w_dot - &self.a_tilde * u_star;
        let kappa = crate::allocation::condition_number(&inner);
        let regularized = !(kappa <= T::lit(REGULARIZATION_THRESHOLD));
        if regularized {
            let lambda = T::lit(REGULARIZATION_FACTOR) * (inner.trace() / T::lit(6.0)).max(T::lit(f64::MIN_POSITIVE));
            for i in 0..6 {
                inner[(i, i)] += lambda;
            }
        }
        let y = inner
            .clone()
            .cholesky()
            .map(|c| c.solve(&residual))
            .or_else(|| inner.lu().solve(&residual))
            .ok_or_else(|| ModelError::Numerical("allocation system is singular".into()))?;
        Ok((u_star + am.transpose() * y, regularized))
    }
}

/// Free-function form of [`DiffAllocation::new`] with the default weight.
pub fn build_diff_allocation<T: Real>(a: &DMatrix<T>, omega: &[T], alpha: &[T], k_alpha: T) -> Result<DiffAllocation<T>> {
    let weight = default_weight(omega.len(), alpha.len(), k_alpha);
    DiffAllocation::new(a, omega, alpha, weight, WeightForm::Objective)
}
