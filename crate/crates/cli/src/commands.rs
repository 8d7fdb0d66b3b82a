use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use tiltrotor_core::{Icosphere, Morphology};
use tiltrotor_design::mass::MassModel;
use tiltrotor_design::{
    beta_sweep, calibrate, design_report, hover_sphere, DesignProblem, DesignResult, EnvelopeKind, EnvelopeSample,
    EnvelopeSolver,
};
use tiltrotor_sim::{
    efficiency_timeline, kappa_timeline, named_trajectory, polynomial_trajectory, run, stats, NamedTrajectory,
    RunManifest, SimError, SimLog, Trajectory, Waypoint,
};

use crate::config::{parse_json, read_text, RunConfig};
use crate::CliError;

/// What a command wrote. `failure` is set when outputs were written but
/// the run did not succeed (divergence, infeasible design).
#[derive(Debug)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    /// Human-readable lines for the terminal.
    pub messages: Vec<String>,
    pub failure: Option<CliError>,
}

struct Output {
    dir: PathBuf,
    command: String,
    manifest: RunManifest,
    messages: Vec<String>,
}

impl Output {
    fn new(dir: &Path, command: &str, seed: u64, cfg: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.into(),
            manifest: RunManifest::new(command, seed, cfg.to_value()),
            messages: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.manifest.add_output(name, bytes);
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))? + "\n";
        self.put(name, text.as_bytes())
    }

    fn put_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Failed(e.to_string());
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
        self.put(name, &bytes)
    }

    fn say(&mut self, line: String) {
        self.messages.push(line);
    }

    fn finish(self) -> Result<Outcome, CliError> {
        let manifest_path = self.dir.join(format!("{}-manifest.json", self.command));
        std::fs::write(&manifest_path, self.manifest.to_json())?;
        Ok(Outcome { manifest: self.manifest, manifest_path, messages: self.messages, failure: None })
    }
}

fn envelope_rows(samples: &[EnvelopeSample]) -> impl Iterator<Item = Vec<f64>> + '_ {
    samples.iter().map(|s| vec![s.direction[0], s.direction[1], s.direction[2], s.value, s.eta])
}

const ENVELOPE_HEADER: [&str; 5] = ["dir_x", "dir_y", "dir_z", "value", "eta"];

/// Writes the force, hover-torque and hover-sphere samples of `morph`.
fn write_envelopes(out: &mut Output, prefix: &str, problem: &DesignProblem, morph: &Morphology<f64>) -> Result<(), CliError> {
    let solver = EnvelopeSolver::new(morph)?;
    let sphere = Icosphere::new(problem.icosphere_level);
    let mg = problem.weight();
    let force = tiltrotor_design::envelope(&solver, &sphere, EnvelopeKind::Force, problem.method);
    let torque = tiltrotor_design::envelope(&solver, &sphere, EnvelopeKind::Torque { hover: [0.0, 0.0, mg] }, problem.method);
    let hover = hover_sphere(&solver, &sphere, mg);
    out.put_csv(&format!("{prefix}_force.csv"), &ENVELOPE_HEADER, envelope_rows(&force.samples))?;
    out.put_csv(&format!("{prefix}_torque.csv"), &ENVELOPE_HEADER, envelope_rows(&torque.samples))?;
    let hover_rows = hover.samples.iter().map(|s| {
        vec![s.direction[0], s.direction[1], s.direction[2], if s.feasible { 1.0 } else { 0.0 }, s.eta]
    });
    out.put_csv(&format!("{prefix}_hover.csv"), &["dir_x", "dir_y", "dir_z", "feasible", "eta"], hover_rows)
}

fn report_lines(r: &DesignResult) -> Vec<String> {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    vec![
        format!("theta [deg]: {}", fmt(&r.theta_deg)),
        format!("beta  [deg]: {}", fmt(&r.beta_deg)),
        format!("force  min/max/mean: {:.1} / {:.1} / {:.1} N", r.force.min, r.force.max, r.force.mean),
        format!("torque min/max/mean: {:.2} / {:.2} / {:.2} N m", r.torque.min, r.torque.max, r.torque.mean),
        format!("hover eta_f: {:.2} .. {:.2} ({:.0}% of directions feasible)", r.hover.eta_min, r.hover.eta_max, 100.0 * r.hover.feasible_fraction),
        format!("mass {:.3} kg, inertia {:.4} {:.4} {:.4} kg m^2", r.mass, r.inertia[0], r.inertia[1], r.inertia[2]),
    ]
}

/// Runs the morphology optimizer. An infeasible result is written and
/// reported through `Outcome::failure`.
pub fn optimize(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let problem = &cfg.design;
    problem.validate()?;
    let result = tiltrotor_design::optimize(problem)?;
    let mut o = Output::new(out, "optimize", problem.seed, cfg)?;
    o.put_json("design.json", &result)?;
    write_envelopes(&mut o, "design", problem, &problem.morphology(&result.theta, &result.beta))?;
    for line in report_lines(&result) {
        o.say(line);
    }
    let feasible = result.feasible;
    let mut outcome = o.finish()?;
    if !feasible {
        outcome.failure = Some(CliError::Infeasible);
    }
    Ok(outcome)
}

fn angles(v: &[f64], n: usize, name: &str) -> Result<Vec<f64>, CliError> {
    match v.len() {
        0 => Ok(vec![0.0; n]),
        k if k == n => Ok(v.to_vec()),
        k => Err(CliError::Config(format!("envelope.{name} has {k} entries, expected {n}"))),
    }
}

/// Envelope metrics of the design problem's vehicle with the configured
/// arm angles.
pub fn envelope(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let problem = &cfg.design;
    problem.validate()?;
    let theta = angles(&cfg.envelope.theta, problem.n_arms, "theta")?;
    let beta = angles(&cfg.envelope.beta, problem.n_arms, "beta")?;
    let report = design_report(problem, &theta, &beta, 0)?;
    let mut o = Output::new(out, "envelope", problem.seed, cfg)?;
    o.put_json("envelope.json", &report)?;
    write_envelopes(&mut o, "envelope", problem, &problem.morphology(&theta, &beta))?;
    for line in report_lines(&report) {
        o.say(line);
    }
    o.finish()
}

/// Envelope extrema along the alternating inclination family.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let problem = &cfg.design;
    problem.validate()?;
    let s = &cfg.sweep;
    if s.steps < 2 || !(s.beta_max > s.beta_min) {
        return Err(CliError::Config("sweep needs steps >= 2 and beta_max > beta_min".into()));
    }
    let betas: Vec<f64> =
        (0..s.steps).map(|i| s.beta_min + (s.beta_max - s.beta_min) * i as f64 / (s.steps - 1) as f64).collect();
    let points = beta_sweep(problem, &betas);
    let mut o = Output::new(out, "sweep", problem.seed, cfg)?;
    o.put_csv("sweep.csv", &["beta", "f_min", "f_z", "tau_min"], points.iter().map(|p| vec![p.beta, p.f_min, p.f_z, p.tau_min]))?;
    if let Some(best) = points.iter().max_by(|a, b| a.f_min.total_cmp(&b.f_min)) {
        o.say(format!("largest f_min {:.2} N at beta = {:.4} rad", best.f_min, best.beta));
    }
    o.finish()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ScanSummary {
    bias: bool,
    extra_force: f64,
    max_log_kappa: f64,
    rank_deficient: usize,
}

/// Condition number of the instantaneous allocation over force directions
/// added to the hover force.
pub fn condition_scan(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let m = &cfg.vehicle;
    m.validate()?;
    if cfg.scan.icosphere_level > 6 {
        return Err(CliError::Config("scan.icosphere_level must be at most 6".into()));
    }
    let mg = m.body.m * m.body.g;
    let extra = cfg.scan.extra_force.unwrap_or(mg);
    let dirs = Icosphere::<f64>::new(cfg.scan.icosphere_level).vertices;
    let bias = &cfg.sim.allocator.bias;
    let scan = tiltrotor_core::condition_scan(m, &Vector3::new(0.0, 0.0, mg), extra, bias, &dirs)?;
    let mut o = Output::new(out, "condition-scan", cfg.sim.seed, cfg)?;
    let rows = scan.directions.iter().zip(&scan.log_kappa).map(|(d, k)| vec![d[0], d[1], d[2], *k]);
    o.put_csv("kappa_scan.csv", &["dir_x", "dir_y", "dir_z", "log_kappa"], rows)?;
    let summary = ScanSummary {
        bias: bias.enabled,
        extra_force: extra,
        max_log_kappa: scan.max_log_kappa,
        rank_deficient: scan.log_kappa.iter().filter(|k| k.is_infinite()).count(),
    };
    o.put_json("kappa_scan.json", &summary)?;
    o.say(format!(
        "bias {}: max ln kappa = {} over {} directions ({} rank deficient)",
        if bias.enabled { "on" } else { "off" },
        scan.max_log_kappa,
        dirs.len(),
        summary.rank_deficient
    ));
    o.finish()
}

/// Fits the free mass-model constants to a target mass and yaw inertia.
pub fn calibrate_mass(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let t = &cfg.calibration;
    let c = calibrate(&MassModel::uncalibrated(), t.n_arms, t.arm_length, t.mass, t.j_zz)?;
    let mut o = Output::new(out, "calibrate-mass", cfg.design.seed, cfg)?;
    o.put_json("mass_model.json", &c)?;
    o.say(format!("m_c_const = {:.5} kg, m_r = {:.5} kg", c.model.m_c_const, c.model.m_r));
    o.say(format!("inertia {:.4} {:.4} {:.4} kg m^2", c.inertia[0], c.inertia[1], c.inertia[2]));
    o.finish()
}

/// A trajectory letter `a`..`g`, or a path to a JSON list of waypoints.
pub fn load_trajectory(spec: &str, scale: f64) -> Result<Trajectory, CliError> {
    if let Some(kind) = NamedTrajectory::parse(&spec.to_ascii_lowercase()) {
        return Ok(named_trajectory(kind, scale)?);
    }
    let path = Path::new(spec);
    let waypoints: Vec<Waypoint> = parse_json(&read_text(path)?, spec)?;
    Ok(polynomial_trajectory(&waypoints)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub trajectory: String,
    pub rows: usize,
    pub end_time: f64,
    pub diverged: bool,
    pub max_position_error: f64,
    pub median_position_error: f64,
    /// Largest `|alpha|` over all arms at the last logged step [rad].
    pub final_max_abs_alpha: f64,
}

impl SimulateSummary {
    pub fn from_log(trajectory: &str, log: &SimLog, diverged: bool) -> Self {
        let mut e: Vec<f64> = log.rows.iter().map(|r| r.error.e_p.norm()).collect();
        e.sort_by(f64::total_cmp);
        let median = if e.is_empty() { f64::NAN } else { tiltrotor_sim::stats::axis_stats("", &e).median };
        Self {
            trajectory: trajectory.into(),
            rows: log.len(),
            end_time: log.rows.last().map_or(0.0, |r| r.time),
            diverged,
            max_position_error: e.last().copied().unwrap_or(f64::NAN),
            median_position_error: median,
            final_max_abs_alpha: log.rows.last().map_or(0.0, |r| r.alpha.iter().fold(0.0, |m: f64, a| m.max(a.abs()))),
        }
    }
}

/// Closed-loop simulation. On divergence the partial log and manifest are
/// written and the divergence is reported through `Outcome::failure`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    cfg.vehicle.validate()?;
    cfg.sim.validate()?;
    let traj = load_trajectory(&cfg.trajectory, cfg.trajectory_scale)?;
    let (log, failure) = match run(&cfg.sim, &cfg.vehicle, &traj) {
        Ok(log) => (log, None),
        Err(SimError::Diverged { time, reason, log }) => (*log, Some(CliError::Diverged { time, reason })),
        Err(e) => return Err(e.into()),
    };
    let mut o = Output::new(out, "simulate", cfg.sim.seed, cfg)?;
    o.manifest.time_span = Some([traj.start_time(), traj.end_time() + cfg.sim.settle]);
    o.put("simlog.csv", log.to_csv_string().as_bytes())?;
    o.put_json("stats.json", &stats(&log))?;
    o.put_csv("efficiency.csv", &["time", "eta_f"], efficiency_timeline(&log).into_iter().map(|(t, v)| vec![t, v]))?;
    o.put_csv("kappa.csv", &["time", "kappa"], kappa_timeline(&log).into_iter().map(|(t, v)| vec![t, v]))?;
    let summary = SimulateSummary::from_log(&cfg.trajectory, &log, failure.is_some());
    o.put_json("summary.json", &summary)?;
    o.say(format!(
        "{} rows to t = {:.2} s, position error median {:.4} m, max {:.4} m",
        summary.rows, summary.end_time, summary.median_position_error, summary.max_position_error
    ));
    if cfg.sim.wound_arms > 0 {
        let ok = summary.final_max_abs_alpha < std::f64::consts::PI;
        o.say(format!(
            "unwinding: final max |alpha| = {:.4} rad, below pi: {}",
            summary.final_max_abs_alpha,
            if ok { "yes" } else { "no" }
        ));
    }
    let mut outcome = o.finish()?;
    outcome.failure = failure;
    Ok(outcome)
}
