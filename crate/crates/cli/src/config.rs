//! Run configuration: one JSON document, every field optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tiltrotor_core::Morphology;
use tiltrotor_design::{CostFunction, DesignProblem};
use tiltrotor_sim::{ControllerKind, SimConfig};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// Arm yaw deviations [rad]; empty means all zero.
    pub theta: Vec<f64>,
    /// Arm inclinations [rad]; empty means all zero.
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub icosphere_level: u32,
    /// Extra force added to the hover force along each direction [N];
    /// defaults to the vehicle weight.
    pub extra_force: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { icosphere_level: 2, extra_force: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { beta_min: 0.0, beta_max: 1.2, steps: 121 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTarget {
    pub n_arms: usize,
    pub arm_length: f64,
    pub mass: f64,
    pub j_zz: f64,
}

impl Default for CalibrationTarget {
    fn default() -> Self {
        Self { n_arms: 6, arm_length: 0.3, mass: 4.0, j_zz: 0.1439 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub design: DesignProblem,
    pub envelope: EnvelopeConfig,
    pub sweep: SweepConfig,
    pub calibration: CalibrationTarget,
    /// Vehicle flown by `simulate` and scanned by `condition-scan`.
    pub vehicle: Morphology<f64>,
    pub sim: SimConfig,
    pub scan: ScanConfig,
    /// Trajectory letter `a`..`g` or path to a JSON waypoint list.
    pub trajectory: String,
    /// Spatial scale of the named trajectory templates.
    pub trajectory_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            design: DesignProblem::default(),
            envelope: EnvelopeConfig::default(),
            sweep: SweepConfig::default(),
            calibration: CalibrationTarget::default(),
            vehicle: Morphology::prototype(),
            sim: SimConfig::default(),
            scan: ScanConfig::default(),
            trajectory: "a".into(),
            trajectory_scale: 1.0,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trajectory: Option<String>,
    pub controller: Option<ControllerKind>,
    pub bias: Option<bool>,
    pub unwind: Option<usize>,
    pub cost: Option<CostFunction>,
}

/// Parses JSON, reporting the location of syntax and type errors.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        let msg = msg.strip_suffix(&suffix).unwrap_or(&msg);
        CliError::Config(format!("{origin}:{}:{}: {msg}", e.line(), e.column()))
    })
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => parse_json(&read_text(p)?, &p.display().to_string()),
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.design.seed = seed;
            self.sim.seed = seed;
        }
        if let Some(t) = &o.trajectory {
            self.trajectory = t.clone();
        }
        if let Some(c) = o.controller {
            self.sim.controller = c;
        }
        if let Some(b) = o.bias {
            self.sim.allocator.bias.enabled = b;
        }
        if let Some(n) = o.unwind {
            self.sim.wound_arms = n;
            self.sim.allocator.unwind.enabled = true;
        }
        if let Some(c) = o.cost {
            self.design.cost = c;
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c: RunConfig = parse_json("{}", "x").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_json::<RunConfig>(&text, "x").unwrap(), c);
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_json::<RunConfig>("{\n  \"sim\": {\n    \"seed\": ,\n  }\n}", "cfg.json").unwrap_err();
        let CliError::Config(msg) = err else { panic!() };
        assert!(msg.starts_with("cfg.json:3:13"), "{msg}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(parse_json::<RunConfig>("{\"sim\": {\"sede\": 1}}", "x").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = RunConfig::default();
        c.apply(&Overrides {
            seed: Some(9),
            trajectory: Some("e".into()),
            controller: Some(ControllerKind::Pid),
            bias: Some(true),
            unwind: Some(4),
            cost: Some(CostFunction::Omnidirectional),
        });
        assert_eq!((c.design.seed, c.sim.seed), (9, 9));
        assert_eq!(c.trajectory, "e");
        assert_eq!(c.sim.controller, ControllerKind::Pid);
        assert!(c.sim.allocator.bias.enabled && c.sim.allocator.unwind.enabled);
        assert_eq!(c.sim.wound_arms, 4);
        assert_eq!(c.design.cost, CostFunction::Omnidirectional);
    }
}
