use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::targets::{optimal_targets, BiasConfig, OptimalTargets, UnwindConfig};
use super::{default_weight, DiffAllocation, WeightForm};
use crate::allocation::{condition_number, instantaneous_allocation, omega_tilde, Wrench};
use crate::error::{ModelError, Result};
use crate::morphology::{Morphology, RateLimits};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct AllocatorConfig<T: Real> {
    pub k_alpha: T,
    #[serde(default)]
    pub weight_form: WeightForm,
    pub unwind: UnwindConfig<T>,
    pub bias: BiasConfig<T>,
}

impl<T: Real> Default for AllocatorConfig<T> {
    fn default() -> Self {
        Self {
            k_alpha: T::lit(1000.0),
            weight_form: WeightForm::Objective,
            unwind: UnwindConfig::default(),
            bias: BiasConfig::default(),
        }
    }
}

/// Integrated actuator references plus the raw and saturated rates that
/// produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct ActuatorCommand<T: Real> {
    pub alpha_ref: Vec<T>,
    pub omega_ref: Vec<T>,
    pub u_raw: DVector<T>,
    pub u_sat: DVector<T>,
}

/// Clamps rotor accelerations and tilt rates to `limits`, integrates them
/// onto the previous references and clamps the rotor speed references to
/// `[omega_min, omega_max]`.
pub fn saturate_integrate<T: Real>(
    u: &DVector<T>,
    limits: &RateLimits<T>,
    omega_bounds: (T, T),
    dt: T,
    alpha_prev: &[T],
    omega_prev: &[T],
) -> Result<ActuatorCommand<T>> {
    let (n, n_r) = (alpha_prev.len(), omega_prev.len());
    if u.len() != n + n_r {
        return Err(ModelError::Dimension { expected: n + n_r, got: u.len() });
    }
    let u_sat = DVector::from_fn(n + n_r, |i, _| {
        let lim = if i < n_r { limits.omega_dot } else { limits.alpha_dot };
        u[i].max(-lim).min(lim)
    });
    let omega_ref = (0..n_r)
        .map(|j| (omega_prev[j] + u_sat[j] * dt).max(omega_bounds.0).min(omega_bounds.1))
        .collect();
    let alpha_ref = (0..n).map(|i| alpha_prev[i] + u_sat[n_r + i] * dt).collect();
    Ok(ActuatorCommand { alpha_ref, omega_ref, u_raw: u.clone(), u_sat })
}

/// Diagnostics of one allocation step.
#[derive(Clone, Debug)]
pub struct AllocationStep<T: Real> {
    pub command: ActuatorCommand<T>,
    pub targets: OptimalTargets<T>,
    /// `||A~ u - wdot||` before saturation.
    pub residual: T,
    /// Condition number of `A_alpha` at the previous tilt references.
    pub kappa: T,
    pub regularized: bool,
}

/// Stateful allocator holding the integrated actuator references.
#[derive(Clone, Debug)]
pub struct DifferentialAllocator<T: Real> {
    pub config: AllocatorConfig<T>,
    a: DMatrix<T>,
    a_pinv: DMatrix<T>,
    limits: RateLimits<T>,
    omega_bounds: (T, T),
    pub alpha_ref: Vec<T>,
    pub omega_ref: Vec<T>,
}

impl<T: Real> DifferentialAllocator<T> {
    pub fn new(morphology: &Morphology<T>, config: AllocatorConfig<T>, alpha0: Vec<T>, omega0: Vec<T>) -> Result<Self> {
        let a = crate::allocation::build_static_allocation(morphology);
        if alpha0.len() != morphology.n_arms() || omega0.len() != morphology.n_rotors() {
            return Err(ModelError::Dimension { expected: morphology.n_rotors(), got: omega0.len() });
        }
        let a_pinv = a
            .clone()
            .pseudo_inverse(T::lit(1e-12) * a.norm())
            .map_err(|e| ModelError::Numerical(e.to_string()))?;
        Ok(Self {
            config,
            a,
            a_pinv,
            limits: morphology.tilt.rate_limits.clone(),
            omega_bounds: (morphology.rotor.omega_min, morphology.rotor.omega_max),
            alpha_ref: alpha0,
            omega_ref: omega0,
        })
    }

    pub fn static_matrix(&self) -> &DMatrix<T> {
        &self.a
    }

    /// Wrench produced by the current references.
    pub fn commanded_wrench(&self) -> Result<Wrench<T>> {
        let sq: Vec<T> = self.omega_ref.iter().map(|w| *w * *w).collect();
        let w = &self.a * omega_tilde(&sq, &self.alpha_ref)?;
        Ok(Wrench::from_slice(w.as_slice()))
    }

    /// Allocates the wrench rate `w_dot`, then saturates and integrates
    /// over `dt`.
    pub fn step(&mut self, w_dot: &Wrench<T>, dt: T) -> Result<AllocationStep<T>> {
        let current = self.commanded_wrench()?;
        let targets = optimal_targets(
            &self.a,
            &self.a_pinv,
            &self.alpha_ref,
            &self.omega_ref,
            &current,
            self.omega_bounds,
            &self.config.bias,
            &self.config.unwind,
            dt,
        )?;
        let weight = default_weight(self.omega_ref.len(), self.alpha_ref.len(), self.config.k_alpha);
        let diff = DiffAllocation::new(&self.a, &self.omega_ref, &self.alpha_ref, weight, self.config.weight_form)?;
        let w_dot = DVector::from_column_slice(w_dot.to_vector().as_slice());
        let (u, regularized) = diff.solve(&targets.u_star, &w_dot)?;
        let residual = (&diff.a_tilde * &u - &w_dot).norm();
        let kappa = condition_number(&instantaneous_allocation(&self.a, &self.alpha_ref)?);
        let command = saturate_integrate(&u, &self.limits, self.omega_bounds, dt, &self.alpha_ref, &self.omega_ref)?;
        self.alpha_ref.clone_from(&command.alpha_ref);
        self.omega_ref.clone_from(&command.omega_ref);
        Ok(AllocationStep { command, targets, residual, kappa, regularized })
    }
}
