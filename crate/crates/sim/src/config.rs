//! Simulation settings.

use serde::{Deserialize, Serialize};
use tiltrotor_core::{AllocatorConfig, LqriWeights, PidGains};

use crate::SimError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    #[default]
    Lqri,
    Pid,
}

impl ControllerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lqri" => Some(Self::Lqri),
            "pid" => Some(Self::Pid),
            _ => None,
        }
    }
}

/// How PID acceleration commands become wrench rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PidJerk {
    /// Difference between the wrench of the current command and the wrench
    /// the allocator currently commands, so allocation and saturation
    /// errors do not accumulate.
    #[default]
    Realized,
    /// Backward difference of consecutive acceleration commands.
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt_physics: f64,
    pub dt_control: f64,
    /// Accelerometer noise standard deviation [m/s^2].
    pub sigma_accel: f64,
    /// Gyroscope noise standard deviation [rad/s].
    pub sigma_gyro: f64,
    /// Estimate accelerations from filtered IMU samples instead of using
    /// the true values.
    pub estimator: bool,
    pub sg_window: usize,
    pub sg_order: usize,
    pub controller: ControllerKind,
    #[serde(default = "LqriWeights::paper")]
    pub lqri: LqriWeights<f64>,
    #[serde(default = "PidGains::paper")]
    pub pid: PidGains<f64>,
    pub pid_jerk: PidJerk,
    pub allocator: AllocatorConfig<f64>,
    pub seed: u64,
    /// Initial position offset from the reference [m].
    pub initial_offset: [f64; 3],
    /// Number of arms, counted from the first, that start one full turn
    /// wound up (`alpha = 2 pi`).
    pub wound_arms: usize,
    /// Hover time appended after the trajectory [s].
    pub settle: f64,
    /// Position error that aborts the run [m].
    pub divergence_limit: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_physics: 1e-3,
            dt_control: 1e-2,
            sigma_accel: 0.0,
            sigma_gyro: 0.0,
            estimator: false,
            sg_window: 21,
            sg_order: 1,
            controller: ControllerKind::Lqri,
            lqri: LqriWeights::paper(),
            pid: PidGains::paper(),
            pid_jerk: PidJerk::Realized,
            allocator: AllocatorConfig::default(),
            seed: 0,
            initial_offset: [0.0; 3],
            wound_arms: 0,
            settle: 0.0,
            divergence_limit: 10.0,
        }
    }
}

impl SimConfig {
    /// Physics steps per control step.
    pub fn substeps(&self) -> usize {
        (self.dt_control / self.dt_physics).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if !(self.dt_physics > 0.0) || !(self.dt_control > 0.0) {
            return bad("time steps must be positive");
        }
        if self.dt_physics > self.dt_control {
            return bad("dt_physics must not exceed dt_control");
        }
        if (self.substeps() as f64 * self.dt_physics - self.dt_control).abs() > 1e-9 * self.dt_control {
            return bad("dt_control must be a multiple of dt_physics");
        }
        if self.sg_window % 2 == 0 || self.sg_order == 0 || self.sg_order >= self.sg_window {
            return bad("sg_window must be odd and larger than sg_order >= 1");
        }
        if !(self.sigma_accel >= 0.0) || !(self.sigma_gyro >= 0.0) {
            return bad("noise levels must be non-negative");
        }
        if !(self.settle >= 0.0) || !(self.divergence_limit > 0.0) {
            return bad("settle must be non-negative and divergence_limit positive");
        }
        if self.initial_offset.iter().any(|x| !x.is_finite()) {
            return bad("initial_offset must be finite");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = SimConfig::default();
        c.validate().unwrap();
        assert_eq!(c.substeps(), 10);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SimConfig>(&json).unwrap(), c);
        let partial: SimConfig = serde_json::from_str(r#"{"controller": "pid", "seed": 3}"#).unwrap();
        assert_eq!(partial.controller, ControllerKind::Pid);
        assert_eq!(partial.pid, PidGains::paper());
    }

    #[test]
    fn rejects_inconsistent_settings() {
        let c = SimConfig { dt_physics: 0.02, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig { sg_window: 20, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig { dt_physics: 3e-3, ..SimConfig::default() };
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<SimConfig>(r#"{"dt": 1}"#).is_err());
    }
}
