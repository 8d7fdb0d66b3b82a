use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::allocation::Wrench;
use crate::error::{ModelError, Result};
use crate::scalar::Real;

/// Tilt bias that breaks thrust colinearity. When the optimal thrust
/// direction of an arm is parallel (within `colinearity`, measured as the
/// sine of the angle) to that of every other arm, the arm receives an
/// offset of `+delta` or `-delta`, alternating with the arm index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct BiasConfig<T: Real> {
    pub enabled: bool,
    pub delta: T,
    pub colinearity: T,
}

impl<T: Real> Default for BiasConfig<T> {
    fn default() -> Self {
        Self { enabled: false, delta: T::lit(0.15), colinearity: T::lit(0.05) }
    }
}

/// Null-space preference toward efficient actuator values. With
/// `enabled`, tilt targets are placed on the branch `2 pi * home[i]`
/// (zero when `home` is empty), otherwise on the branch nearest the
/// current command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct UnwindConfig<T: Real> {
    pub enabled: bool,
    /// Preferred tilt rate magnitude [rad/s].
    pub v_alpha_dot: T,
    /// Preferred rotor acceleration magnitude [rad/s^2].
    pub v_omega_dot: T,
    #[serde(default)]
    pub home: Vec<i32>,
}

impl<T: Real> Default for UnwindConfig<T> {
    fn default() -> Self {
        Self { enabled: false, v_alpha_dot: T::one(), v_omega_dot: T::lit(250.0), home: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalTargets<T: Real> {
    pub alpha: Vec<T>,
    pub omega: Vec<T>,
    /// Preferred differential command `[omega_dot*; alpha_dot*]`.
    pub u_star: DVector<T>,
    pub bias: Vec<T>,
}

/// Unit lateral and vertical thrust directions of each arm, read from the
/// force rows of the static allocation matrix.
pub(crate) fn arm_directions<T: Real>(a: &DMatrix<T>, n_arms: usize) -> Vec<(Vector3<T>, Vector3<T>)> {
    (0..n_arms)
        .map(|i| {
            let t: Vector3<T> = a.fixed_view::<3, 1>(0, 2 * i).into_owned();
            let u: Vector3<T> = a.fixed_view::<3, 1>(0, 2 * i + 1).into_owned();
            (t.normalize(), u.normalize())
        })
        .collect()
}

/// Bias offsets for the given optimal per-arm thrust vectors. Arms with
/// (numerically) zero thrust count as colinear with everything.
pub fn alpha_bias<T: Real>(thrust: &[Vector3<T>], cfg: &BiasConfig<T>) -> Vec<T> {
    let n = thrust.len();
    if !cfg.enabled {
        return vec![T::zero(); n];
    }
    let scale = thrust.iter().map(|f| f.norm()).fold(T::zero(), |a, b| a.max(b));
    let tiny = scale * T::lit(1e-9);
    let dirs: Vec<Option<Vector3<T>>> =
        thrust.iter().map(|f| (f.norm() > tiny).then(|| f.normalize())).collect();
    (0..n)
        .map(|i| {
            let colinear = dirs.iter().enumerate().all(|(k, d)| match (&dirs[i], d) {
                (Some(a), Some(b)) if k != i => a.cross(b).norm() < cfg.colinearity,
                _ => true,
            });
            match (colinear, i % 2) {
                (false, _) => T::zero(),
                (true, 0) => cfg.delta,
                (true, _) => -cfg.delta,
            }
        })
        .collect()
}

fn clamp<T: Real>(x: T, limit: T) -> T {
    x.max(-limit).min(limit)
}

/// Efficient actuator values for `wrench` via the pseudoinverse of the
/// static allocation, and the preferred rates toward them. Zero-thrust
/// arms keep their current tilt.
#[allow(clippy::too_many_arguments)]
pub fn optimal_targets<T: Real>(
    a: &DMatrix<T>,
    a_pinv: &DMatrix<T>,
    alpha_c: &[T],
    omega_c: &[T],
    wrench: &Wrench<T>,
    omega_bounds: (T, T),
    bias_cfg: &BiasConfig<T>,
    unwind: &UnwindConfig<T>,
    dt: T,
) -> Result<OptimalTargets<T>> {
    let (n, n_r) = (alpha_c.len(), omega_c.len());
    if a.ncols() != 2 * n_r || a_pinv.nrows() != 2 * n_r || n == 0 || n_r % n != 0 {
        return Err(ModelError::Dimension { expected: a.ncols() / 2, got: n_r });
    }
    if !(dt > T::zero()) {
        return Err(ModelError::Domain("allocation period must be positive".into()));
    }
    let pairs = a_pinv * wrench.to_vector();
    let (omega_min, omega_max) = omega_bounds;
    let tiny = T::lit(1e-9) * omega_max * omega_max;

    let mut lateral = vec![T::zero(); n];
    let mut vertical = vec![T::zero(); n];
    let mut omega = Vec::with_capacity(n_r);
    for j in 0..n_r {
        let (l, v) = (pairs[2 * j], pairs[2 * j + 1]);
        lateral[j % n] += l;
        vertical[j % n] += v;
        omega.push((l * l + v * v).sqrt().sqrt().max(omega_min).min(omega_max));
    }

    let dirs = arm_directions(a, n);
    let thrust: Vec<Vector3<T>> = (0..n).map(|i| dirs[i].0 * lateral[i] + dirs[i].1 * vertical[i]).collect();
    let bias = alpha_bias(&thrust, bias_cfg);

    let two_pi = T::two_pi();
    let alpha: Vec<T> = (0..n)
        .map(|i| {
            let has_thrust = (lateral[i] * lateral[i] + vertical[i] * vertical[i]).sqrt() > tiny;
            if !has_thrust {
                return alpha_c[i] + bias[i];
            }
            let base = lateral[i].atan2(vertical[i]) + bias[i];
            let winding = if unwind.enabled {
                T::lit(unwind.home.get(i).copied().unwrap_or(0) as f64)
            } else {
                ((alpha_c[i] - base) / two_pi).round()
            };
            base + two_pi * winding
        })
        .collect();

    let mut u_star = DVector::zeros(n_r + n);
    for j in 0..n_r {
        u_star[j] = clamp((omega[j] - omega_c[j]) / dt, unwind.v_omega_dot);
    }
    for i in 0..n {
        u_star[n_r + i] = clamp((alpha[i] - alpha_c[i]) / dt, unwind.v_alpha_dot);
    }
    Ok(OptimalTargets { alpha, omega, u_star, bias })
}
