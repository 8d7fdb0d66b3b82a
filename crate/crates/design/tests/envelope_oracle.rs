use std::f64::consts::TAU;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tiltrotor_core::{build_static_allocation, instantaneous_allocation, Icosphere, Morphology};
use tiltrotor_design::{EnvelopeKind, EnvelopeMethod, EnvelopeSolver};

fn quad(beta: f64) -> Morphology<f64> {
    let p = Morphology::<f64>::prototype();
    let mut rotor = p.rotor.clone();
    rotor.rotors_per_arm = 1;
    let m = Morphology::symmetric(4, 0.3, rotor, p.tilt, p.body);
    m.with_arm_angles(&[0.0; 4], &[beta, -beta, beta, -beta])
}

/// Largest `lambda` with fixed tilt angles: a linear program in the squared
/// rotor speeds only. Four rotors cannot meet six wrench equalities for
/// generic tilts, so the residual enters as an l1 penalty.
fn fixed_tilt_max(a: &DMatrix<f64>, alpha: &[f64], base: &[f64; 6], unit: &[f64; 6], c_f: f64, w2max: f64, penalty: f64) -> f64 {
    let a_alpha = instantaneous_allocation(a, alpha).unwrap();
    let scale = c_f * w2max;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let y: Vec<_> = (0..a_alpha.ncols()).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let mu = lp.add_var(1.0, (0.0, f64::INFINITY));
    let mut slack = Vec::new();
    for row in 0..6 {
        let mut terms: Vec<_> = y.iter().enumerate().map(|(k, v)| (*v, a_alpha[(row, k)] / c_f)).collect();
        terms.push((mu, -unit[row]));
        for sign in [1.0, -1.0] {
            let s = lp.add_var(-penalty, (0.0, f64::INFINITY));
            terms.push((s, sign));
            slack.push(s);
        }
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, base[row] / scale);
    }
    lp.solve()
        .ok()
        .and_then(|o| o.into_solution().ok())
        .map(|s| (s[mu] - penalty * slack.iter().map(|v| s[*v]).sum::<f64>()) * scale)
        .unwrap_or(0.0)
}


/// Grid search over all tilt angles followed by a shrinking random pattern
/// search around the best grid points, tightening the residual penalty in
/// stages so the search follows the feasible ridge.
fn oracle(m: &Morphology<f64>, d: &Vector3<f64>, kind: EnvelopeKind) -> f64 {
    let a = build_static_allocation(m);
    let (c_f, w2max) = (m.rotor.c_f, m.rotor.omega_sq_max());
    let (base, unit) = match kind {
        EnvelopeKind::Force => ([0.0; 6], [d.x, d.y, d.z, 0.0, 0.0, 0.0]),
        EnvelopeKind::Torque { hover: h } => ([h[0], h[1], h[2], 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, d.x, d.y, d.z]),
    };
    let eval = |alpha: &[f64], k: f64| fixed_tilt_max(&a, alpha, &base, &unit, c_f, w2max, k);
    let steps: u32 = 8;
    let mut grid = Vec::new();
    for idx in 0..steps.pow(4) {
        let alpha: Vec<f64> = (0..4u32).map(|k| TAU * ((idx / steps.pow(k)) % steps) as f64 / steps as f64).collect();
        grid.push((eval(&alpha, 1.0), alpha));
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut best = 0.0f64;
    for (_, mut alpha) in grid.into_iter().take(8) {
        let mut value = 0.0;
        for k in [1.0, 10.0, 100.0, 1e3, 1e4] {
            value = eval(&alpha, k);
            let mut h = 0.2;
            while h > 1e-6 {
                let mut moved = false;
                for _ in 0..24 {
                    let dir: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    for s in [-h, h] {
                        let trial: Vec<f64> = alpha.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
                        let v = eval(&trial, k);
                        if v > value {
                            value = v;
                            alpha = trial;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    h *= 0.5;
                }
            }
        }
        best = best.max(value);
    }
    best
}

#[test]
fn optimal_envelope_matches_tilt_grid_oracle() {
    let m = quad(0.5);
    let solver = EnvelopeSolver::new(&m).unwrap();
    let mg = 2.0 * 9.81;
    let dirs = [Vector3::z(), Vector3::x(), Vector3::new(1.0, -2.0, 0.5).normalize(), -Vector3::z()];
    for d in dirs {
        for kind in [EnvelopeKind::Force, EnvelopeKind::Torque { hover: [0.0, 0.0, mg] }] {
            let lp = solver.max_in_direction(&d, kind, EnvelopeMethod::Optimal).value;
            let brute = oracle(&m, &d, kind);
            assert!(brute > 0.0);
            println!("{kind:?} {:?}: lp {lp:.4} oracle {brute:.4}", d.as_slice());
            assert!((lp - brute).abs() <= 0.01 * brute, "{kind:?} {d:?}: lp {lp} oracle {brute}");
        }
    }
}

#[test]
fn envelope_respects_arm_symmetry() {
    let beta = 0.5;
    let m = Morphology::<f64>::prototype().with_arm_angles(&[0.0; 6], &[beta, -beta, beta, -beta, beta, -beta]);
    let s = EnvelopeSolver::new(&m).unwrap();
    let rot = nalgebra::Rotation3::from_axis_angle(&Vector3::z_axis(), 2.0 * TAU / 6.0);
    for d in Icosphere::<f64>::new(1).vertices {
        let f0 = s.max_in_direction(&d, EnvelopeKind::Force, EnvelopeMethod::Pseudoinverse).value;
        let f1 = s.max_in_direction(&(rot * d), EnvelopeKind::Force, EnvelopeMethod::Pseudoinverse).value;
        assert!((f0 - f1).abs() < 1e-9 * f0);
    }
}
