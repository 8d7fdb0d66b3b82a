//! Offline reference trajectories from waypoints.
//!
//! Positions use 7th-order Hermite segments with Catmull-Rom velocities and
//! zero acceleration and jerk at the waypoints. Attitude moves by axis-angle
//! increments: within a segment the body turns about a fixed axis with a
//! 7th-order angle profile, and the rate carries over a waypoint only when
//! the next increment shares the axis.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use tiltrotor_core::so3::{exp_map, rot_x, rot_z};
use tiltrotor_core::{RotationSO3, TrajectorySample};

use crate::SimError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub time: f64,
    pub position: [f64; 3],
    /// Axis-angle rotation from the previous waypoint's attitude, in its
    /// body frame. For the first waypoint, the initial attitude.
    #[serde(default)]
    pub rotation: [f64; 3],
}

impl Waypoint {
    pub fn new(time: f64, position: [f64; 3], rotation: [f64; 3]) -> Self {
        Self { time, position, rotation }
    }
}

/// Coefficients of `p(s) = sum c_k s^k` on `s in [0, 1]`.
type Poly = SVector<f64, 8>;

/// 7th-order Hermite polynomial through position, velocity, acceleration
/// and jerk at both ends of a segment of length `h`.
fn hermite7(start: [f64; 4], end: [f64; 4], h: f64) -> Poly {
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    let mut rhs = Poly::zeros();
    for d in 0..4 {
        let scale = h.powi(d as i32);
        let fact: f64 = (1..=d).map(|x| x as f64).product();
        m[(d, d)] = fact;
        rhs[d] = start[d] * scale;
        for k in d..8 {
            let falling: f64 = (0..d).map(|i| (k - i) as f64).product();
            m[(4 + d, k)] = falling;
        }
        rhs[4 + d] = end[d] * scale;
    }
    m.lu().solve(&rhs).expect("Hermite system is regular")
}

/// Value and first three derivatives in `t`, for `s = t / h`.
fn eval(c: &Poly, s: f64, h: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (d, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in (d..8).rev() {
            let falling: f64 = (0..d).map(|i| (k - i) as f64).product();
            acc = acc * s + c[k] * falling;
        }
        *o = acc / h.powi(d as i32);
    }
    out
}

#[derive(Clone, Debug)]
struct Segment {
    t0: f64,
    h: f64,
    pos: [Poly; 3],
    start_attitude: RotationSO3<f64>,
    /// Unit rotation axis in the body frame at the segment start.
    axis: Vector3<f64>,
    angle: Poly,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    segments: Vec<Segment>,
    start: f64,
    end: f64,
    final_position: Vector3<f64>,
    final_attitude: RotationSO3<f64>,
    pub waypoints: Vec<Waypoint>,
}

fn axis_of(v: &[f64; 3]) -> Option<Vector3<f64>> {
    let v = Vector3::from(*v);
    (v.norm() > 1e-12).then(|| v.normalize())
}

/// Builds the reference through `waypoints`.
pub fn polynomial_trajectory(waypoints: &[Waypoint]) -> Result<Trajectory, SimError> {
    if waypoints.len() < 2 {
        return Err(SimError::Config("a trajectory needs at least two waypoints".into()));
    }
    if waypoints.iter().any(|w| !w.time.is_finite() || w.position.iter().chain(&w.rotation).any(|x| !x.is_finite())) {
        return Err(SimError::Config("waypoints must be finite".into()));
    }
    if let Some(w) = waypoints.windows(2).find(|w| w[1].time <= w[0].time) {
        return Err(SimError::Config(format!("waypoint times must increase (t = {} then {})", w[0].time, w[1].time)));
    }
    let n = waypoints.len();
    let p = |i: usize| Vector3::from(waypoints[i].position);
    let t = |i: usize| waypoints[i].time;
    let velocity = |i: usize| {
        if i == 0 || i + 1 == n {
            Vector3::zeros()
        } else {
            (p(i + 1) - p(i - 1)) / (t(i + 1) - t(i - 1))
        }
    };
    // Angle rate at waypoint i (between increment i and i + 1).
    let angle_rate = |i: usize| {
        if i == 0 || i + 1 >= n {
            return 0.0;
        }
        let (a, b) = (&waypoints[i].rotation, &waypoints[i + 1].rotation);
        match (axis_of(a), axis_of(b)) {
            (Some(x), Some(y)) if (x - y).norm() < 1e-9 => {
                let (la, lb) = (Vector3::from(*a).norm(), Vector3::from(*b).norm());
                (la + lb) / (t(i + 1) - t(i - 1))
            }
            _ => 0.0,
        }
    };

    let mut attitude = exp_map(&Vector3::from(waypoints[0].rotation));
    let mut segments = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let h = t(i + 1) - t(i);
        let (v0, v1) = (velocity(i), velocity(i + 1));
        let pos = [0, 1, 2].map(|k| hermite7([p(i)[k], v0[k], 0.0, 0.0], [p(i + 1)[k], v1[k], 0.0, 0.0], h));
        let inc = Vector3::from(waypoints[i + 1].rotation);
        let total = inc.norm();
        let axis = if total > 1e-12 { inc / total } else { Vector3::x() };
        let angle = hermite7([0.0, angle_rate(i), 0.0, 0.0], [total, angle_rate(i + 1), 0.0, 0.0], h);
        segments.push(Segment { t0: t(i), h, pos, start_attitude: attitude, axis, angle });
        attitude *= exp_map(&inc);
        attitude.renormalize();
    }
    Ok(Trajectory {
        segments,
        start: t(0),
        end: t(n - 1),
        final_position: p(n - 1),
        final_attitude: attitude,
        waypoints: waypoints.to_vec(),
    })
}

impl Trajectory {
    pub fn start_time(&self) -> f64 {
        self.start
    }

    pub fn end_time(&self) -> f64 {
        self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    /// Reference at time `t`; held constant outside the waypoint span.
    pub fn sample(&self, t: f64) -> TrajectorySample<f64> {
        let idx = self.segments.partition_point(|s| s.t0 <= t);
        let seg = match idx.checked_sub(1).and_then(|i| self.segments.get(i)) {
            Some(s) if t <= s.t0 + s.h => s,
            _ if t < self.start => return self.hold_at(t, true),
            _ => return self.hold_at(t, false),
        };
        let s = (t - seg.t0) / seg.h;
        let d = seg.pos.map(|c| eval(&c, s, seg.h));
        let a = eval(&seg.angle, s, seg.h);
        let attitude = seg.start_attitude * exp_map(&(seg.axis * a[0]));
        let world_axis = seg.start_attitude * seg.axis;
        let v = |k: usize| Vector3::new(d[0][k], d[1][k], d[2][k]);
        TrajectorySample {
            time: t,
            position: v(0),
            velocity: v(1),
            acceleration: v(2),
            jerk: v(3),
            attitude,
            angular_velocity: world_axis * a[1],
            angular_acceleration: world_axis * a[2],
            angular_jerk: world_axis * a[3],
        }
    }

    fn hold_at(&self, t: f64, before: bool) -> TrajectorySample<f64> {
        let (p, r) = match (before, self.segments.first()) {
            (true, Some(s)) => (Vector3::new(s.pos[0][0], s.pos[1][0], s.pos[2][0]), s.start_attitude),
            _ => (self.final_position, self.final_attitude),
        };
        TrajectorySample { attitude: r, ..TrajectorySample::hold(t, p) }
    }

    /// Samples on `[start, end]` with spacing `dt` (the end is included).
    pub fn samples(&self, dt: f64) -> Vec<TrajectorySample<f64>> {
        let n = (self.duration() / dt).round() as usize;
        (0..=n).map(|k| self.sample(self.start + k as f64 * dt)).collect()
    }

    /// Stationary reference of the given length.
    pub fn hold(position: [f64; 3], duration: f64) -> Result<Self, SimError> {
        let w = |t| Waypoint::new(t, position, [0.0; 3]);
        if duration > 0.0 {
            return polynomial_trajectory(&[w(0.0), w(duration)]);
        }
        if !(duration == 0.0) || position.iter().any(|x| !x.is_finite()) {
            return Err(SimError::Config("hold needs a finite position and non-negative duration".into()));
        }
        Ok(Self {
            segments: Vec::new(),
            start: 0.0,
            end: 0.0,
            final_position: Vector3::from(position),
            final_attitude: RotationSO3::identity(),
            waypoints: vec![w(0.0)],
        })
    }
}

/// The evaluation suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTrajectory {
    /// Figure eight, tilt up to 30 deg, 29.4 s.
    A,
    /// Figure eight, tilt up to 80 deg, 29.4 s.
    B,
    /// Fast figure eight, tilt up to 30 deg, 10.7 s.
    C,
    /// 90 deg roll, translate, reverse, rotate about body y; 36.1 s.
    D,
    /// 90 deg roll, two turns about body z on a circle; 35.5 s.
    E,
    /// Full turn about body x; 16 s.
    F,
    /// Full turn about body y; 8 s.
    G,
}

impl NamedTrajectory {
    pub const ALL: [NamedTrajectory; 7] = [Self::A, Self::B, Self::C, Self::D, Self::E, Self::F, Self::G];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "a" => Self::A,
            "b" => Self::B,
            "c" => Self::C,
            "d" => Self::D,
            "e" => Self::E,
            "f" => Self::F,
            "g" => Self::G,
            _ => return None,
        })
    }

    pub fn letter(self) -> char {
        (b'a' + Self::ALL.iter().position(|k| *k == self).unwrap_or(0) as u8) as char
    }

    pub fn duration(self) -> f64 {
        match self {
            Self::A | Self::B => 29.4,
            Self::C => 10.7,
            Self::D => 36.1,
            Self::E => 35.5,
            Self::F => 16.0,
            Self::G => 8.0,
        }
    }

    /// Largest tilt of the body z axis from vertical, where bounded.
    pub fn max_tilt(self) -> Option<f64> {
        match self {
            Self::A | Self::C => Some(30f64.to_radians()),
            Self::B => Some(80f64.to_radians()),
            _ => None,
        }
    }
}

const HOME: [f64; 3] = [0.0, 0.0, 1.0];

fn rotvec(r: &RotationSO3<f64>) -> [f64; 3] {
    tiltrotor_core::so3::log_map(r).into()
}

/// Waypoints for a figure eight of `size` metres through the origin of
/// the horizontal plane, with a tilt pattern bounded by `tilt`.
fn figure_eight(duration: f64, tilt: f64, size: f64) -> Vec<Waypoint> {
    let lead = 1.0;
    let laps = 16;
    let body = duration - 2.0 * lead;
    let mut out = vec![Waypoint::new(0.0, HOME, [0.0; 3])];
    let mut prev = RotationSO3::identity();
    for k in 0..=laps {
        let phi = TAU * k as f64 / laps as f64;
        let position = [size * phi.sin(), 0.5 * size * (2.0 * phi).sin(), HOME[2] + 0.25 * size * phi.sin().powi(2)];
        let heading = 0.5 * phi.sin();
        let lean_dir = 2.0 * phi;
        let lean = if k == 0 || k == laps { 0.0 } else { tilt * (0.5 + 0.5 * (2.0 * phi).sin().abs()) };
        let axis = nalgebra::Unit::new_normalize(Vector3::new(lean_dir.cos(), lean_dir.sin(), 0.0));
        let target = rot_z(heading) * RotationSO3::from_axis_angle(&axis, lean);
        out.push(Waypoint::new(lead + body * k as f64 / laps as f64, position, rotvec(&(prev.inverse() * target))));
        prev = target;
    }
    out.push(Waypoint::new(duration, HOME, rotvec(&prev.inverse())));
    out
}

/// Waypoints of a named trajectory, with lengths scaled by `scale`.
pub fn named_waypoints(kind: NamedTrajectory, scale: f64) -> Vec<Waypoint> {
    let s = scale;
    let at = |x: f64, y: f64, z: f64| [s * x, s * y, HOME[2] + s * (z - HOME[2])];
    let w = Waypoint::new;
    match kind {
        NamedTrajectory::A => figure_eight(kind.duration(), 28f64.to_radians(), 1.5 * s),
        NamedTrajectory::B => figure_eight(kind.duration(), 76f64.to_radians(), 1.5 * s),
        NamedTrajectory::C => figure_eight(kind.duration(), 28f64.to_radians(), 1.5 * s),
        NamedTrajectory::D => vec![
            w(0.0, HOME, [0.0; 3]),
            w(2.0, HOME, [0.0; 3]),
            w(7.0, HOME, [FRAC_PI_2, 0.0, 0.0]),
            w(9.0, HOME, [0.0; 3]),
            w(14.0, at(1.5, 0.0, 1.0), [0.0; 3]),
            w(20.0, at(-1.5, 0.0, 1.0), [0.0; 3]),
            w(24.0, HOME, [0.0; 3]),
            w(29.0, HOME, [0.0, FRAC_PI_2, 0.0]),
            w(34.1, HOME, rotvec(&(rot_x(FRAC_PI_2) * tiltrotor_core::so3::rot_y(FRAC_PI_2)).inverse())),
            w(36.1, HOME, [0.0; 3]),
        ],
        NamedTrajectory::E => {
            let mut out = vec![w(0.0, HOME, [0.0; 3]), w(2.0, HOME, [0.0; 3]), w(7.0, HOME, [FRAC_PI_2, 0.0, 0.0])];
            let steps = 16;
            for k in 1..=steps {
                let phi = 2.0 * TAU * k as f64 / steps as f64;
                let p = at(phi.sin(), 1.0 - phi.cos(), 1.0);
                out.push(w(7.0 + 22.0 * k as f64 / steps as f64, p, [0.0, 0.0, 2.0 * TAU / steps as f64]));
            }
            out.push(w(33.5, HOME, [-FRAC_PI_2, 0.0, 0.0]));
            out.push(w(35.5, HOME, [0.0; 3]));
            out
        }
        NamedTrajectory::F => flip(Vector3::x(), 3.0, 13.0, 16.0),
        NamedTrajectory::G => flip(Vector3::y(), 1.0, 7.0, 8.0),
    }
}

/// Full turn about a body axis in four quarter increments between
/// `t0` and `t1`, hovering before and after.
fn flip(axis: Vector3<f64>, t0: f64, t1: f64, end: f64) -> Vec<Waypoint> {
    let mut out = vec![Waypoint::new(0.0, HOME, [0.0; 3]), Waypoint::new(t0, HOME, [0.0; 3])];
    for k in 1..=4 {
        out.push(Waypoint::new(t0 + (t1 - t0) * k as f64 / 4.0, HOME, (axis * FRAC_PI_2).into()));
    }
    out.push(Waypoint::new(end, HOME, [0.0; 3]));
    out
}

pub fn named_trajectory(kind: NamedTrajectory, scale: f64) -> Result<Trajectory, SimError> {
    polynomial_trajectory(&named_waypoints(kind, scale))
}

/// Largest tilt of the body z axis from world z over samples at `dt`.
pub fn max_tilt(traj: &Trajectory, dt: f64) -> f64 {
    traj.samples(dt)
        .iter()
        .map(|s| (s.attitude * Vector3::z()).z.clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max)
}

/// Total turning angle `integral |omega| dt` about body axes, projected on
/// `axis` (body frame).
pub fn net_rotation(traj: &Trajectory, axis: &Vector3<f64>, dt: f64) -> f64 {
    let samples = traj.samples(dt);
    samples
        .windows(2)
        .map(|w| {
            let wb0 = w[0].attitude.inverse() * w[0].angular_velocity;
            let wb1 = w[1].attitude.inverse() * w[1].angular_velocity;
            0.5 * (wb0 + wb1).dot(axis) * dt
        })
        .sum()
}
