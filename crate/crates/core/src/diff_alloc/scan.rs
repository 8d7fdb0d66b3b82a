use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::targets::{optimal_targets, BiasConfig, UnwindConfig};
use crate::allocation::{build_static_allocation, condition_number, instantaneous_allocation, Wrench};
use crate::error::{ModelError, Result};
use crate::morphology::Morphology;
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionScan {
    pub directions: Vec<[f64; 3]>,
    /// `ln kappa(A_alpha)` per direction; `+inf` marks rank loss.
    pub log_kappa: Vec<f64>,
    pub max_log_kappa: f64,
}

/// For each direction `d`, allocates `hover + extra * d` (no torque) with
/// the pseudoinverse targets and records `ln kappa` of the instantaneous
/// allocation at the resulting tilt angles.
pub fn condition_scan<T: Real>(
    m: &Morphology<T>,
    hover_force: &Vector3<T>,
    extra_force: T,
    bias: &BiasConfig<T>,
    directions: &[Vector3<T>],
) -> Result<ConditionScan> {
    let a = build_static_allocation(m);
    let a_pinv: DMatrix<T> = a
        .clone()
        .pseudo_inverse(T::lit(1e-12) * a.norm())
        .map_err(|e| ModelError::Numerical(e.to_string()))?;
    let alpha0 = vec![T::zero(); m.n_arms()];
    let omega0 = vec![m.hover_speed(); m.n_rotors()];
    let bounds = (m.rotor.omega_min, m.rotor.omega_max);
    let unwind = UnwindConfig::default();
    let mut log_kappa = Vec::with_capacity(directions.len());
    for d in directions {
        let w = Wrench::new(hover_force + d * extra_force, Vector3::zeros());
        let t = optimal_targets(&a, &a_pinv, &alpha0, &omega0, &w, bounds, bias, &unwind, T::one())?;
        let k = condition_number(&instantaneous_allocation(&a, &t.alpha)?).to_f64();
        log_kappa.push(if k.is_finite() { k.ln() } else { f64::INFINITY });
    }
    let max_log_kappa = log_kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConditionScan {
        directions: directions.iter().map(|d| [d.x.to_f64(), d.y.to_f64(), d.z.to_f64()]).collect(),
        log_kappa,
        max_log_kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icosphere::Icosphere;

    #[test]
    fn bias_reduces_worst_condition() {
        let m = Morphology::<f64>::prototype();
        let mg = m.body.m * m.body.g;
        let dirs = Icosphere::<f64>::new(2).vertices;
        let hover = Vector3::new(0.0, 0.0, mg);
        let off = condition_scan(&m, &hover, mg, &BiasConfig::default(), &dirs).unwrap();
        let on = BiasConfig { enabled: true, ..BiasConfig::default() };
        let on = condition_scan(&m, &hover, mg, &on, &dirs).unwrap();
        assert!(off.max_log_kappa >= 30.0);
        assert!(on.max_log_kappa <= 10.0, "{}", on.max_log_kappa);
    }
}
