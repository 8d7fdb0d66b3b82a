//! Wrench envelopes: the largest force or torque a morphology can produce
//! along each direction, summary metrics over a sphere of directions and
//! actuation efficiency indices.

use std::f64::consts::TAU;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use tiltrotor_core::{build_static_allocation, Icosphere, Morphology};

use crate::DesignError;

/// Which wrench component is maximized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// Pure force `lambda * d`, zero torque.
    Force,
    /// Torque `lambda * d` while also producing the body force `hover`.
    Torque { hover: [f64; 3] },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeMethod {
    /// Scale the pseudoinverse allocation until one rotor saturates.
    #[default]
    Pseudoinverse,
    /// Linear program over per-rotor thrust disks. Exact for one rotor per
    /// arm; an upper bound otherwise since rotors on one arm share a tilt.
    Optimal,
}

/// The linear program starts from a square around each rotor disk and adds
/// tangent cuts until every disk constraint holds within this tolerance.
pub const DISK_TOLERANCE: f64 = 1e-6;
const INITIAL_SIDES: usize = 4;
const MAX_CUT_ROUNDS: usize = 200;

/// Result of one directional maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalMax {
    /// Largest magnitude along the direction [N or N m]; zero when infeasible.
    pub value: f64,
    /// Efficiency of the maximizing allocation.
    pub eta: f64,
    /// Interleaved lateral/vertical squared-speed components per rotor.
    pub pairs: DVector<f64>,
}

impl DirectionalMax {
    fn infeasible(n: usize) -> Self {
        Self { value: 0.0, eta: 0.0, pairs: DVector::zeros(n) }
    }
}

/// Force efficiency `||f|| / sum ||f_i||` of a set of rotor thrust vectors.
pub fn force_efficiency(force: &Vector3<f64>, thrust_magnitudes: &[f64]) -> f64 {
    let total: f64 = thrust_magnitudes.iter().sum();
    if total > 0.0 {
        force.norm() / total
    } else {
        0.0
    }
}

/// Torque efficiency `||tau|| / sum l_i ||f_i||`.
pub fn torque_efficiency(torque: &Vector3<f64>, thrust_magnitudes: &[f64], lengths: &[f64]) -> f64 {
    let total: f64 = thrust_magnitudes.iter().zip(lengths).map(|(f, l)| f * l).sum();
    if total > 0.0 {
        torque.norm() / total
    } else {
        0.0
    }
}

/// Precomputed allocation data of one morphology.
#[derive(Clone, Debug)]
pub struct EnvelopeSolver {
    a: DMatrix<f64>,
    pinv: DMatrix<f64>,
    full_rank: bool,
    omega_sq_max: f64,
    c_f: f64,
    lengths: Vec<f64>,
}

impl EnvelopeSolver {
    pub fn new(m: &Morphology<f64>) -> Result<Self, DesignError> {
        m.validate()?;
        let a = build_static_allocation(m);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let full_rank = svd.singular_values.min() > 1e-10 * smax;
        let pinv = svd
            .pseudo_inverse(1e-12 * smax)
            .map_err(|e| DesignError::Invalid(e.to_string()))?;
        let lengths = (0..m.n_rotors()).map(|j| m.arms[m.arm_of_rotor(j)].length).collect();
        Ok(Self { a, pinv, full_rank, omega_sq_max: m.rotor.omega_sq_max(), c_f: m.rotor.c_f, lengths })
    }

    pub fn n_rotors(&self) -> usize {
        self.a.ncols() / 2
    }

    pub fn allocation(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn thrusts(&self, pairs: &DVector<f64>) -> Vec<f64> {
        (0..self.n_rotors()).map(|j| self.c_f * pair_norm(pairs, j)).collect()
    }

    fn efficiency(&self, kind: EnvelopeKind, pairs: &DVector<f64>) -> f64 {
        let w = &self.a * pairs;
        let thrusts = self.thrusts(pairs);
        match kind {
            EnvelopeKind::Force => force_efficiency(&Vector3::new(w[0], w[1], w[2]), &thrusts),
            EnvelopeKind::Torque { .. } => torque_efficiency(&Vector3::new(w[3], w[4], w[5]), &thrusts, &self.lengths),
        }
    }

    fn reachable(&self, w: &DVector<f64>, x: &DVector<f64>) -> bool {
        self.full_rank || (&self.a * x - w).norm() <= 1e-9 * w.norm().max(1.0)
    }

    /// Largest wrench magnitude along the unit direction `dir`.
    pub fn max_in_direction(&self, dir: &Vector3<f64>, kind: EnvelopeKind, method: EnvelopeMethod) -> DirectionalMax {
        let d = dir.normalize();
        let out = match method {
            EnvelopeMethod::Pseudoinverse => self.pinv_max(&d, kind),
            EnvelopeMethod::Optimal => self.lp_max(&d, kind),
        };
        out.unwrap_or_else(|| DirectionalMax::infeasible(self.a.ncols()))
    }

    fn pinv_max(&self, d: &Vector3<f64>, kind: EnvelopeKind) -> Option<DirectionalMax> {
        let (base, unit) = split(d, kind);
        let q = &self.pinv * &unit;
        if !self.reachable(&unit, &q) {
            return None;
        }
        let p = &self.pinv * &base;
        if base.norm() > 0.0 && !self.reachable(&base, &p) {
            return None;
        }
        let r2 = self.omega_sq_max * self.omega_sq_max;
        let mut lambda = f64::INFINITY;
        for j in 0..self.n_rotors() {
            let (p0, p1, q0, q1) = (p[2 * j], p[2 * j + 1], q[2 * j], q[2 * j + 1]);
            let a = q0 * q0 + q1 * q1;
            let b = 2.0 * (p0 * q0 + p1 * q1);
            let c = p0 * p0 + p1 * p1 - r2;
            if c > 0.0 {
                return None;
            }
            if a > 0.0 {
                lambda = lambda.min((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a));
            }
        }
        if !lambda.is_finite() {
            return None;
        }
        let pairs = p + q * lambda;
        let eta = self.efficiency(kind, &pairs);
        Some(DirectionalMax { value: lambda, eta, pairs })
    }

    fn lp_max(&self, d: &Vector3<f64>, kind: EnvelopeKind) -> Option<DirectionalMax> {
        let (base, unit) = split(d, kind);
        let scale = self.c_f * self.omega_sq_max;
        let n_r = self.n_rotors();
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let y: Vec<_> = (0..2 * n_r).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
        let mu = lp.add_var(1.0, (0.0, f64::INFINITY));
        for row in 0..6 {
            let mut terms: Vec<_> = y.iter().enumerate().map(|(k, v)| (*v, self.a[(row, k)] / self.c_f)).collect();
            terms.push((mu, -unit[row]));
            lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, base[row] / scale);
        }
        for j in 0..n_r {
            for k in 0..INITIAL_SIDES {
                let (s, c) = (TAU * k as f64 / INITIAL_SIDES as f64).sin_cos();
                lp.add_constraint([(y[2 * j], c), (y[2 * j + 1], s)], ComparisonOp::Le, 1.0);
            }
        }
        let mut sol = lp.solve().ok()?.into_solution().ok()?;
        for _ in 0..MAX_CUT_ROUNDS {
            let mut violated = Vec::new();
            for j in 0..n_r {
                let (l, v) = (sol[y[2 * j]], sol[y[2 * j + 1]]);
                let r = l.hypot(v);
                if r > 1.0 + DISK_TOLERANCE {
                    violated.push((j, l / r, v / r));
                }
            }
            if violated.is_empty() {
                break;
            }
            for (j, c, s) in violated {
                sol = sol
                    .add_constraint([(y[2 * j], c), (y[2 * j + 1], s)], ComparisonOp::Le, 1.0)
                    .ok()?
                    .into_solution()
                    .ok()?;
            }
        }
        let pairs = DVector::from_iterator(2 * n_r, y.iter().map(|v| sol[*v] * self.omega_sq_max));
        let eta = self.efficiency(kind, &pairs);
        Some(DirectionalMax { value: sol[mu] * scale, eta, pairs })
    }

    /// Minimum over `dirs` of the pseudoinverse maximum, without building
    /// per-direction allocations.
    pub fn min_over(&self, dirs: &[Vector3<f64>], kind: EnvelopeKind) -> f64 {
        if !self.full_rank {
            return dirs
                .iter()
                .map(|d| self.max_in_direction(d, kind, EnvelopeMethod::Pseudoinverse).value)
                .fold(f64::INFINITY, f64::min);
        }
        let (base, col) = match kind {
            EnvelopeKind::Force => (Vector3::zeros(), 0),
            EnvelopeKind::Torque { hover } => (Vector3::from(hover), 3),
        };
        let r2 = self.omega_sq_max * self.omega_sq_max;
        let rows: Vec<([f64; 2], [Vector3<f64>; 2])> = (0..self.n_rotors())
            .map(|j| {
                let row = |r: usize| Vector3::new(self.pinv[(r, col)], self.pinv[(r, col + 1)], self.pinv[(r, col + 2)]);
                let hover = |r: usize| {
                    (0..3).map(|k| self.pinv[(r, k)] * base[k]).sum::<f64>()
                };
                ([hover(2 * j), hover(2 * j + 1)], [row(2 * j), row(2 * j + 1)])
            })
            .collect();
        if rows.iter().any(|(p, _)| p[0] * p[0] + p[1] * p[1] > r2) {
            return 0.0;
        }
        let mut out = f64::INFINITY;
        for d in dirs {
            let d = d.normalize();
            let mut lambda = f64::INFINITY;
            for (p, q) in &rows {
                let (q0, q1) = (q[0].dot(&d), q[1].dot(&d));
                let a = q0 * q0 + q1 * q1;
                if a > 0.0 {
                    let b = 2.0 * (p[0] * q0 + p[1] * q1);
                    let c = p[0] * p[0] + p[1] * p[1] - r2;
                    lambda = lambda.min((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a));
                }
            }
            out = out.min(if lambda.is_finite() { lambda } else { 0.0 });
        }
        out
    }

    /// Static hover along `dir`: the pseudoinverse allocation of the force
    /// `weight * dir`. Returns its force efficiency when no rotor saturates.
    pub fn hover(&self, dir: &Vector3<f64>, weight: f64) -> Option<f64> {
        let w = DVector::from_column_slice(&[dir.x * weight, dir.y * weight, dir.z * weight, 0.0, 0.0, 0.0]);
        let x = &self.pinv * &w;
        let feasible = self.reachable(&w, &x) && (0..self.n_rotors()).all(|j| pair_norm(&x, j) <= self.omega_sq_max);
        feasible.then(|| self.efficiency(EnvelopeKind::Force, &x))
    }
}

fn pair_norm(x: &DVector<f64>, j: usize) -> f64 {
    x[2 * j].hypot(x[2 * j + 1])
}

fn split(d: &Vector3<f64>, kind: EnvelopeKind) -> (DVector<f64>, DVector<f64>) {
    let (base, unit) = match kind {
        EnvelopeKind::Force => (Vector6::zeros(), Vector6::new(d.x, d.y, d.z, 0.0, 0.0, 0.0)),
        EnvelopeKind::Torque { hover: h } => {
            (Vector6::new(h[0], h[1], h[2], 0.0, 0.0, 0.0), Vector6::new(0.0, 0.0, 0.0, d.x, d.y, d.z))
        }
    };
    (DVector::from_column_slice(base.as_slice()), DVector::from_column_slice(unit.as_slice()))
}

/// Convenience wrapper around [`EnvelopeSolver::max_in_direction`].
pub fn max_wrench_in_direction(
    m: &Morphology<f64>,
    dir: &Vector3<f64>,
    kind: EnvelopeKind,
    method: EnvelopeMethod,
) -> Result<f64, DesignError> {
    Ok(EnvelopeSolver::new(m)?.max_in_direction(dir, kind, method).value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub direction: [f64; 3],
    pub value: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub volume: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeMetrics {
    #[serde(flatten)]
    pub summary: EnvelopeSummary,
    pub samples: Vec<EnvelopeSample>,
}

/// Envelope over the vertices of `sphere`; the volume is that of the
/// radial surface through the sampled maxima.
pub fn envelope(solver: &EnvelopeSolver, sphere: &Icosphere<f64>, kind: EnvelopeKind, method: EnvelopeMethod) -> EnvelopeMetrics {
    let samples: Vec<EnvelopeSample> = sphere
        .vertices
        .iter()
        .map(|d| {
            let r = solver.max_in_direction(d, kind, method);
            EnvelopeSample { direction: [d.x, d.y, d.z], value: r.value, eta: r.eta }
        })
        .collect();
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let summary = EnvelopeSummary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        volume: sphere.radial_volume(&values),
    };
    EnvelopeMetrics { summary, samples }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoverSample {
    /// Direction of the required thrust in the body frame.
    pub direction: [f64; 3],
    pub feasible: bool,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoverSphere {
    pub feasible_fraction: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub samples: Vec<HoverSample>,
}

/// Static hover feasibility and force efficiency for every body
/// orientation, parametrized by the thrust direction `weight * d`.
pub fn hover_sphere(solver: &EnvelopeSolver, sphere: &Icosphere<f64>, weight: f64) -> HoverSphere {
    let samples: Vec<HoverSample> = sphere
        .vertices
        .iter()
        .map(|d| {
            let eta = solver.hover(d, weight);
            HoverSample { direction: [d.x, d.y, d.z], feasible: eta.is_some(), eta: eta.unwrap_or(0.0) }
        })
        .collect();
    let etas: Vec<f64> = samples.iter().filter(|s| s.feasible).map(|s| s.eta).collect();
    HoverSphere {
        feasible_fraction: etas.len() as f64 / samples.len() as f64,
        eta_min: if etas.is_empty() { 0.0 } else { etas.iter().copied().fold(f64::INFINITY, f64::min) },
        eta_max: etas.iter().copied().fold(0.0, f64::max),
        samples,
    }
}
