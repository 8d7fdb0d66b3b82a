//! Fixed-step closed loop: controller and allocator at the control rate,
//! plant at the physics rate with actuator references held in between.

use std::collections::VecDeque;

use nalgebra::{DMatrix, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tiltrotor_core::control::{
    compute_error_state, feedback_linearize, pid_wrench_rate, stability_condition, stability_margin, Integrators,
    LqriGain, PidController, PidOutput,
};
use tiltrotor_core::dynamics::angular_acceleration;
use tiltrotor_core::{
    ActuatorState, DifferentialAllocator, ErrorState, Morphology, RigidBodyParams, RigidBodyState, RotationSO3,
    TrajectorySample, Wrench,
};

use crate::config::{ControllerKind, PidJerk, SimConfig};
use crate::filter::SavitzkyGolay;
use crate::log::{LogRow, SimLog};
use crate::plant::Plant;
use crate::trajectory::Trajectory;
use crate::SimError;

/// Actuator state that produces the hover wrench at `attitude` through the
/// pseudoinverse of the static allocation. The first `wound_arms` arms get
/// one extra turn.
pub fn initial_actuators(plant: &Plant, attitude: &RotationSO3<f64>, wound_arms: usize) -> Result<ActuatorState<f64>, SimError> {
    let m = &plant.morphology;
    let a: &DMatrix<f64> = &plant.allocation;
    let pinv = a.clone().pseudo_inverse(1e-12 * a.norm()).map_err(|e| SimError::Config(e.to_string()))?;
    let f = attitude.inverse() * Vector3::new(0.0, 0.0, m.body.m * m.body.g);
    let pairs = pinv * Wrench::new(f, Vector3::zeros()).to_vector();
    let n = m.n_arms();
    let mut sum = vec![(0.0, 0.0); n];
    let omega = (0..m.n_rotors())
        .map(|j| {
            let (l, v) = (pairs[2 * j], pairs[2 * j + 1]);
            sum[j % n].0 += l;
            sum[j % n].1 += v;
            (l * l + v * v).sqrt().sqrt().clamp(m.rotor.omega_min, m.rotor.omega_max)
        })
        .collect();
    let alpha = sum
        .iter()
        .enumerate()
        .map(|(i, (l, v))| l.atan2(*v) + if i < wound_arms { std::f64::consts::TAU } else { 0.0 })
        .collect();
    Ok(ActuatorState { alpha, omega })
}

/// Body wrench that realizes PID acceleration commands at the current state.
fn pid_command_wrench(out: &PidOutput<f64>, state: &RigidBodyState<f64>, body: &RigidBodyParams<f64>) -> Wrench<f64> {
    let f = state.attitude.inverse() * (out.acceleration - body.gravity_world()) * body.m;
    let w = state.angular_velocity;
    let tau = body.inertia.component_mul(&out.angular_acceleration)
        + w.cross(&body.inertia.component_mul(&w))
        + body.r_com.cross(&f);
    Wrench::new(f, tau)
}

enum Controller {
    Lqri { gain: Box<LqriGain<f64>>, integrators: Integrators<f64>, margin: f64 },
    Pid { pid: PidController<f64>, jerk: PidJerk, started: bool },
}

struct Command {
    wrench_rate: Wrench<f64>,
    error: ErrorState<f64>,
    stability: (f64, f64),
}

impl Controller {
    fn new(config: &SimConfig) -> Result<Self, SimError> {
        Ok(match config.controller {
            ControllerKind::Lqri => {
                let gain = LqriGain::new(&config.lqri)?;
                let margin = stability_margin(&gain);
                Controller::Lqri { gain: Box::new(gain), integrators: Integrators::default(), margin }
            }
            ControllerKind::Pid => {
                Controller::Pid { pid: PidController::new(config.pid.clone()), jerk: config.pid_jerk, started: false }
            }
        })
    }

    fn step(
        &mut self,
        state: &RigidBodyState<f64>,
        reference: &TrajectorySample<f64>,
        body: &RigidBodyParams<f64>,
        current: &Wrench<f64>,
        dt: f64,
    ) -> Result<Command, SimError> {
        Ok(match self {
            Controller::Lqri { gain, integrators, margin } => {
                let error = compute_error_state(state, reference, integrators, dt);
                let u = gain.control(&error);
                let check = stability_condition(*margin, &error);
                Command { wrench_rate: feedback_linearize(&u, state, reference, body), error, stability: (check.lhs, check.rhs) }
            }
            Controller::Pid { pid, jerk, started } => {
                let out = pid.step(state, reference, dt)?;
                // Without jerk history the backward form starts from the
                // realized wrench as well.
                let wrench_rate = if *started && *jerk == PidJerk::Backward {
                    pid_wrench_rate(&out, state, body)
                } else {
                    let target = pid_command_wrench(&out, state, body);
                    Wrench::from_vector(&((target.to_vector() - current.to_vector()) / dt))
                };
                *started = true;
                Command { wrench_rate, error: out.error, stability: (f64::NAN, f64::NAN) }
            }
        })
    }
}

/// Noisy IMU samples at the physics rate, smoothed on demand.
struct Estimator {
    filter: SavitzkyGolay,
    accel: [VecDeque<f64>; 3],
    gyro: [VecDeque<f64>; 3],
    rng: ChaCha8Rng,
    noise_accel: Normal<f64>,
    noise_gyro: Normal<f64>,
    dt: f64,
}

impl Estimator {
    fn new(config: &SimConfig) -> Result<Self, SimError> {
        let filter = SavitzkyGolay::new(config.sg_window, config.sg_order)
            .ok_or_else(|| SimError::Config("invalid Savitzky-Golay settings".into()))?;
        let normal = |s: f64| Normal::new(0.0, s).map_err(|e| SimError::Config(e.to_string()));
        Ok(Self {
            filter,
            accel: Default::default(),
            gyro: Default::default(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            noise_accel: normal(config.sigma_accel)?,
            noise_gyro: normal(config.sigma_gyro)?,
            dt: config.dt_physics,
        })
    }

    fn record(&mut self, state: &RigidBodyState<f64>) {
        let cap = self.filter.window;
        for k in 0..3 {
            let a = state.acceleration[k] + self.noise_accel.sample(&mut self.rng);
            let w = state.angular_velocity[k] + self.noise_gyro.sample(&mut self.rng);
            for (buf, x) in [(&mut self.accel[k], a), (&mut self.gyro[k], w)] {
                if buf.len() == cap {
                    buf.pop_front();
                }
                buf.push_back(x);
            }
        }
    }

    /// The true pose and velocity with estimated accelerations and rates.
    fn measure(&mut self, truth: &RigidBodyState<f64>) -> RigidBodyState<f64> {
        let mut s = truth.clone();
        for k in 0..3 {
            let accel = self.accel[k].make_contiguous();
            s.acceleration[k] = self.filter.smooth(accel).value;
            let gyro = self.gyro[k].make_contiguous();
            s.angular_velocity[k] = self.filter.smooth(gyro).value;
            s.angular_acceleration[k] = self.filter.derivative(gyro, self.dt).value;
        }
        s
    }
}

fn quat(r: &RotationSO3<f64>) -> [f64; 4] {
    let q = nalgebra::UnitQuaternion::from_rotation_matrix(r);
    [q.w, q.i, q.j, q.k]
}

/// Simulates `trajectory` (plus `config.settle` of hover at its end) from
/// the reference start offset by `config.initial_offset`. One row is
/// logged per control step. Divergence returns the rows logged so far.
pub fn run(config: &SimConfig, morphology: &Morphology<f64>, trajectory: &Trajectory) -> Result<SimLog, SimError> {
    config.validate()?;
    let plant = Plant::new(morphology)?;
    let body = &morphology.body;
    let dt = config.dt_control;
    let substeps = config.substeps();

    let reference = trajectory.sample(trajectory.start_time());
    let mut state = reference.as_state();
    state.position += Vector3::from(config.initial_offset);
    let mut act = initial_actuators(&plant, &state.attitude, config.wound_arms)?;
    let wrench = plant.wrench(&act)?;
    state.acceleration = state.attitude * wrench.force / body.m + body.gravity_world();
    state.angular_acceleration = angular_acceleration(&state.angular_velocity, &wrench, body)?;

    let mut allocator =
        DifferentialAllocator::new(morphology, config.allocator.clone(), act.alpha.clone(), act.omega.clone())?;
    let mut controller = Controller::new(config)?;
    let mut estimator = if config.estimator { Some(Estimator::new(config)?) } else { None };
    if let Some(e) = estimator.as_mut() {
        e.record(&state);
    }

    let ticks = ((trajectory.duration() + config.settle) / dt).round() as usize;
    let mut log = SimLog::new(morphology.n_arms(), morphology.n_rotors());
    for k in 0..=ticks {
        let t = trajectory.start_time() + k as f64 * dt;
        let reference = trajectory.sample(t);
        let measured = match estimator.as_mut() {
            Some(e) => e.measure(&state),
            None => state.clone(),
        };
        let current = allocator.commanded_wrench()?;
        let cmd = controller.step(&measured, &reference, body, &current, dt)?;
        let alloc = allocator.step(&cmd.wrench_rate, dt)?;

        let v3 = |v: &Vector3<f64>| [v.x, v.y, v.z];
        log.push(LogRow {
            time: t,
            position: v3(&state.position),
            velocity: v3(&state.velocity),
            acceleration: v3(&state.acceleration),
            attitude: quat(&state.attitude),
            angular_velocity: v3(&state.angular_velocity),
            angular_acceleration: v3(&state.angular_acceleration),
            ref_position: v3(&reference.position),
            ref_velocity: v3(&reference.velocity),
            ref_attitude: quat(&reference.attitude),
            ref_angular_velocity: v3(&(state.attitude.inverse() * reference.angular_velocity)),
            error: cmd.error,
            alpha_ref: alloc.command.alpha_ref.clone(),
            alpha: act.alpha.clone(),
            omega_ref: alloc.command.omega_ref.clone(),
            omega: act.omega.clone(),
            eta_f: plant.force_efficiency(&act),
            kappa: alloc.kappa,
            stability_lhs: cmd.stability.0,
            stability_rhs: cmd.stability.1,
            regularized: alloc.regularized,
            residual: alloc.residual,
            saturated: alloc.command.u_raw.iter().zip(alloc.command.u_sat.iter()).filter(|(a, b)| a != b).count(),
        });

        let e_p = cmd.error.e_p.norm();
        if !(e_p <= config.divergence_limit) {
            let reason = format!("position error {e_p:.3} m exceeds {} m", config.divergence_limit);
            return Err(SimError::Diverged { time: t, reason, log: Box::new(log) });
        }
        if k == ticks {
            break;
        }
        for _ in 0..substeps {
            match plant.step(&state, &act, &alloc.command.alpha_ref, &alloc.command.omega_ref, config.dt_physics) {
                Ok((s, a)) => {
                    state = s;
                    act = a;
                }
                Err(e) => return Err(SimError::Diverged { time: t, reason: e.to_string(), log: Box::new(log) }),
            }
            if let Some(e) = estimator.as_mut() {
                e.record(&state);
            }
        }
    }
    Ok(log)
}
