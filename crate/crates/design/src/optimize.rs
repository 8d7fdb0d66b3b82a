//! Multi-start Nelder-Mead search over the per-arm tilt-axis angles
//! `theta` (about body z) and inclinations `beta`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tiltrotor_core::morphology::{RigidBodyParams, RotorParams};
use tiltrotor_core::{Icosphere, Morphology, GRAVITY};

use crate::envelope::{envelope, hover_sphere, EnvelopeKind, EnvelopeMethod, EnvelopeSolver, EnvelopeSummary};
use crate::mass::{compute_mass_inertia, MassModel};
use crate::DesignError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFunction {
    /// Maximize the vertical force subject to `f_min > m g`.
    #[default]
    VerticalForce,
    /// Maximize the normalized sum `f_min / (m g) + tau_min / (m g l)`.
    Omnidirectional,
}

impl CostFunction {
    /// Maps the numeric selector used on the command line.
    pub fn from_index(i: u32) -> Option<Self> {
        match i {
            1 => Some(Self::VerticalForce),
            2 => Some(Self::Omnidirectional),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignProblem {
    pub n_arms: usize,
    pub arm_length: f64,
    pub mass: f64,
    pub gravity: f64,
    pub rotor: RotorParams<f64>,
    pub cost: CostFunction,
    pub method: EnvelopeMethod,
    /// Icosphere subdivision used to sample directions.
    pub icosphere_level: u32,
    /// Random starts in addition to the structured ones.
    pub random_starts: usize,
    /// Nelder-Mead restarts per start.
    pub restarts: usize,
    /// Evaluation budget per Nelder-Mead run.
    pub max_evals: usize,
    /// Weight of `sum theta^2` in the cost.
    pub theta_weight: f64,
    /// Weight of the `f_min < m g` violation, relative to `m g`.
    pub penalty_weight: f64,
    pub seed: u64,
    pub mass_model: MassModel,
}

impl Default for DesignProblem {
    fn default() -> Self {
        Self {
            n_arms: 6,
            arm_length: 0.3,
            mass: 4.0,
            gravity: GRAVITY,
            rotor: Morphology::<f64>::prototype().rotor,
            cost: CostFunction::VerticalForce,
            method: EnvelopeMethod::Pseudoinverse,
            icosphere_level: 3,
            random_starts: 8,
            restarts: 3,
            max_evals: 4000,
            theta_weight: 0.01,
            penalty_weight: 100.0,
            seed: 0,
            mass_model: MassModel::default(),
        }
    }
}

/// Envelope quantities entering the cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    pub f_min: f64,
    pub f_z: f64,
    pub tau_min: f64,
}

impl DesignProblem {
    pub fn validate(&self) -> Result<(), DesignError> {
        if self.n_arms < 2 || !(self.arm_length > 0.0) || !(self.mass > 0.0) || !(self.gravity > 0.0) {
            return Err(DesignError::Invalid("arm count, length, mass and gravity must be positive".into()));
        }
        if self.max_evals == 0 || self.icosphere_level > 6 {
            return Err(DesignError::Invalid("evaluation budget or icosphere level out of range".into()));
        }
        if !(self.theta_weight >= 0.0) || !(self.penalty_weight >= 0.0) {
            return Err(DesignError::Invalid("cost weights must be non-negative".into()));
        }
        self.mass_model.validate()
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.gravity
    }

    /// Morphology with the given arm angles; inertia from the mass model.
    pub fn morphology(&self, theta: &[f64], beta: &[f64]) -> Morphology<f64> {
        let tilt = Morphology::<f64>::prototype().tilt;
        let body = RigidBodyParams { m: self.mass, inertia: Vector3::new(1.0, 1.0, 1.0), r_com: Vector3::zeros(), g: self.gravity };
        let base = Morphology::symmetric(self.n_arms, self.arm_length, self.rotor.clone(), tilt, body);
        let mut m = base.with_arm_angles(theta, beta);
        let (_, j) = compute_mass_inertia(&m.arms, &self.mass_model);
        m.body.inertia = j.diagonal();
        m
    }

    fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.n_arms)
    }

    /// Cost at `x = [theta; beta]`. Angles outside `(-pi/2, pi/2)` are
    /// clamped and the excess penalized.
    pub fn evaluate(&self, x: &[f64], sphere: &Icosphere<f64>) -> Evaluation {
        let clamped: Vec<f64> = x.iter().map(|v| v.clamp(-FRAC_PI_2, FRAC_PI_2)).collect();
        let excess: f64 = x.iter().zip(&clamped).map(|(a, b)| (a - b).abs()).sum();
        let (theta, beta) = self.split(&clamped);
        let morph = self.morphology(theta, beta);
        let Ok(solver) = EnvelopeSolver::new(&morph) else {
            return Evaluation { cost: f64::INFINITY, f_min: 0.0, f_z: 0.0, tau_min: 0.0 };
        };
        let mg = self.weight();
        let min_over = |kind| match self.method {
            EnvelopeMethod::Pseudoinverse => solver.min_over(&sphere.vertices, kind),
            EnvelopeMethod::Optimal => sphere
                .vertices
                .iter()
                .map(|d| solver.max_in_direction(d, kind, self.method).value)
                .fold(f64::INFINITY, f64::min),
        };
        let f_min = min_over(EnvelopeKind::Force);
        let f_z = solver.max_in_direction(&Vector3::z(), EnvelopeKind::Force, self.method).value;
        let tau_min = match self.cost {
            CostFunction::Omnidirectional => min_over(EnvelopeKind::Torque { hover: [0.0, 0.0, mg] }),
            CostFunction::VerticalForce => 0.0,
        };
        let penalty = self.penalty_weight * (mg - f_min).max(0.0) / mg + 1e3 * excess;
        let reg = self.theta_weight * theta.iter().map(|t| t * t).sum::<f64>();
        let objective = match self.cost {
            CostFunction::VerticalForce => -f_z / mg - 1e-3 * f_min / mg,
            CostFunction::Omnidirectional => -(f_min / mg + tau_min / (mg * self.arm_length)),
        };
        Evaluation { cost: objective + penalty + reg, f_min, f_z, tau_min }
    }

    /// Starting points: the flat design, alternating inclinations of both
    /// signs, a uniform inclination and `random_starts` uniform samples.
    pub fn starts(&self) -> Vec<Vec<f64>> {
        let n = self.n_arms;
        let alt = |b: f64| (0..2 * n).map(|i| if i < n { 0.0 } else if (i - n) % 2 == 0 { b } else { -b }).collect();
        let mut out = vec![vec![0.0; 2 * n], alt(0.2), alt(-0.2)];
        out.push((0..2 * n).map(|i| if i < n { 0.0 } else { 0.2 }).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_starts {
            out.push((0..2 * n).map(|_| rng.gen_range(-0.6..0.6)).collect());
        }
        out
    }
}

/// Adaptive Nelder-Mead. Returns the best point, its value and the number
/// of evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect() };
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        simplex = order.iter().map(|i| simplex[*i].clone()).collect();
        values = order.iter().map(|i| values[*i]).collect();
        let spread = simplex[1..]
            .iter()
            .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < tol && (values[n] - values[0]).abs() < tol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let xr = lerp(&centroid, &simplex[n], -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = lerp(&centroid, &simplex[n], -alpha * gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = lerp(&centroid, &simplex[n], -alpha * rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &simplex[n], rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < fr.min(values[n]) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            simplex[i] = lerp(&simplex[0], &simplex[i], sigma);
            values[i] = f(&simplex[i]);
        }
        evals += n;
    }
    let best = (0..=n).min_by(|a, b| values[*a].total_cmp(&values[*b])).unwrap_or(0);
    (simplex[best].clone(), values[best], evals)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoverSummary {
    pub feasible_fraction: f64,
    pub eta_min: f64,
    pub eta_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub cost_function: CostFunction,
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta_deg: Vec<f64>,
    pub beta_deg: Vec<f64>,
    pub cost: f64,
    /// Whether the force envelope contains the weight in every direction.
    pub feasible: bool,
    pub force: EnvelopeSummary,
    /// Torque envelope while hovering upright.
    pub torque: EnvelopeSummary,
    pub hover: HoverSummary,
    pub mass: f64,
    pub inertia: [f64; 3],
    pub evaluations: usize,
    pub seed: u64,
}

/// Full metrics of the design with the given angles.
pub fn design_report(problem: &DesignProblem, theta: &[f64], beta: &[f64], evaluations: usize) -> Result<DesignResult, DesignError> {
    problem.validate()?;
    if theta.len() != problem.n_arms || beta.len() != problem.n_arms {
        return Err(DesignError::Invalid(format!("expected {} arm angles", problem.n_arms)));
    }
    let sphere = Icosphere::new(problem.icosphere_level);
    let morph = problem.morphology(theta, beta);
    let solver = EnvelopeSolver::new(&morph)?;
    let mg = problem.weight();
    let force = envelope(&solver, &sphere, EnvelopeKind::Force, problem.method).summary;
    let torque = envelope(&solver, &sphere, EnvelopeKind::Torque { hover: [0.0, 0.0, mg] }, problem.method).summary;
    let hover = hover_sphere(&solver, &sphere, mg);
    let x: Vec<f64> = theta.iter().chain(beta).copied().collect();
    let eval = problem.evaluate(&x, &sphere);
    let (mass, j) = compute_mass_inertia(&morph.arms, &problem.mass_model);
    Ok(DesignResult {
        cost_function: problem.cost,
        theta: theta.to_vec(),
        beta: beta.to_vec(),
        theta_deg: theta.iter().map(|t| t.to_degrees()).collect(),
        beta_deg: beta.iter().map(|b| b.to_degrees()).collect(),
        cost: eval.cost,
        feasible: force.min > mg,
        force,
        torque,
        hover: HoverSummary { feasible_fraction: hover.feasible_fraction, eta_min: hover.eta_min, eta_max: hover.eta_max },
        mass,
        inertia: [j[(0, 0)], j[(1, 1)], j[(2, 2)]],
        evaluations,
        seed: problem.seed,
    })
}

/// Runs every start (in parallel, reduced in start order) and reports the
/// best design. A design whose force envelope does not contain the weight
/// is returned with `feasible == false`.
pub fn optimize(problem: &DesignProblem) -> Result<DesignResult, DesignError> {
    problem.validate()?;
    let sphere = Icosphere::new(problem.icosphere_level);
    let runs: Vec<(Vec<f64>, f64, usize)> = problem
        .starts()
        .par_iter()
        .map(|x0| {
            let f = |x: &[f64]| problem.evaluate(x, &sphere).cost;
            let (mut x, mut fx, mut evals) = nelder_mead(f, x0, 0.1, problem.max_evals, 1e-7);
            for _ in 0..problem.restarts {
                let (x1, f1, e1) = nelder_mead(f, &x, 0.05, problem.max_evals, 1e-7);
                evals += e1;
                let improved = f1 < fx - 1e-9;
                if f1 < fx {
                    x = x1;
                    fx = f1;
                }
                if !improved {
                    break;
                }
            }
            (x, fx, evals)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (x, _, _) = runs
        .into_iter()
        .reduce(|best, r| if r.1 < best.1 { r } else { best })
        .ok_or_else(|| DesignError::Invalid("no starting points".into()))?;
    let x: Vec<f64> = x.iter().map(|v| v.clamp(-FRAC_PI_2, FRAC_PI_2)).collect();
    let (theta, beta) = problem.split(&x);
    design_report(problem, theta, beta, evaluations)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub f_min: f64,
    pub f_z: f64,
    pub tau_min: f64,
}

/// Envelope quantities along `beta_i = b (-1)^i`, `theta = 0`.
pub fn beta_sweep(problem: &DesignProblem, betas: &[f64]) -> Vec<SweepPoint> {
    let sphere = Icosphere::new(problem.icosphere_level);
    let p = DesignProblem { cost: CostFunction::Omnidirectional, ..problem.clone() };
    betas
        .par_iter()
        .map(|b| {
            let x: Vec<f64> = (0..2 * p.n_arms)
                .map(|i| if i < p.n_arms { 0.0 } else if (i - p.n_arms) % 2 == 0 { *b } else { -*b })
                .collect();
            let e = p.evaluate(&x, &sphere);
            SweepPoint { beta: *b, f_min: e.f_min, f_z: e.f_z, tau_min: e.tau_min }
        })
        .collect()
}
