//! Named benchmark scenarios with recorded gains and acceptance thresholds.
//!
//! Each preset is a JSON file compiled into the crate: a full scenario plus
//! the measurable outcome thresholds the run is expected to meet. PI
//! presets bound the tail action error; RISE presets bound the final action
//! error and the tail observation error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ScenarioConfig};
use crate::sim::{SimError, Trajectory};

/// All preset names, grouped by game family and strategy.
pub const PRESET_NAMES: [&str; 10] = [
    "example1_pi",
    "example1_pi_disrupted",
    "example2_pi",
    "example1_rise",
    "example2_rise",
    "example2_rise_disrupted",
    "nonquadratic_pi",
    "nonquadratic_rise",
    "nonquadratic_pi_disrupted",
    "nonquadratic_rise_disrupted",
];

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset '{name}'; known presets: {known}")]
    Unknown { name: String, known: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Thresholds on measurable trajectory statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedOutcomes {
    /// Window for tail statistics.
    pub tail_window: (f64, f64),
    /// Bound on `sup ||xi||_inf` over the tail window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tail_xi_inf: Option<f64>,
    /// Bound on `||xi||_inf` at the final sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_final_xi_inf: Option<f64>,
    /// Bound on `sup ||zeta2||_inf` over the tail window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tail_zeta2_inf: Option<f64>,
}

/// One checked threshold.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeCheck {
    pub name: &'static str,
    pub limit: f64,
    pub actual: f64,
    pub passed: bool,
}

/// All threshold checks for a run.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeReport {
    pub passed: bool,
    pub checks: Vec<OutcomeCheck>,
}

impl ExpectedOutcomes {
    /// Evaluates every declared threshold against a trajectory.
    pub fn evaluate(&self, traj: &Trajectory) -> Result<OutcomeReport, SimError> {
        let mut checks = Vec::new();
        if let Some(limit) = self.max_tail_xi_inf {
            let actual = traj.sup_xi_inf(self.tail_window)?;
            checks.push(OutcomeCheck {
                name: "tail_xi_inf",
                limit,
                actual,
                passed: actual <= limit,
            });
        }
        if let Some(limit) = self.max_final_xi_inf {
            let actual = traj.final_xi_inf();
            checks.push(OutcomeCheck {
                name: "final_xi_inf",
                limit,
                actual,
                passed: actual <= limit,
            });
        }
        if let Some(limit) = self.max_tail_zeta2_inf {
            let actual = traj.sup_zeta2_inf(self.tail_window)?;
            checks.push(OutcomeCheck {
                name: "tail_zeta2_inf",
                limit,
                actual,
                passed: actual <= limit,
            });
        }
        Ok(OutcomeReport {
            passed: checks.iter().all(|c| c.passed),
            checks,
        })
    }
}

/// A named scenario with its expected outcomes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub expected: ExpectedOutcomes,
}

macro_rules! preset_file {
    ($name:literal) => {
        ($name, include_str!(concat!("../presets/", $name, ".json")))
    };
}

const PRESET_FILES: [(&str, &str); 10] = [
    preset_file!("example1_pi"),
    preset_file!("example1_pi_disrupted"),
    preset_file!("example2_pi"),
    preset_file!("example1_rise"),
    preset_file!("example2_rise"),
    preset_file!("example2_rise_disrupted"),
    preset_file!("nonquadratic_pi"),
    preset_file!("nonquadratic_rise"),
    preset_file!("nonquadratic_pi_disrupted"),
    preset_file!("nonquadratic_rise_disrupted"),
];

/// Loads a preset by name.
pub fn load(name: &str) -> Result<Preset, PresetError> {
    let Some((_, text)) = PRESET_FILES.iter().find(|(n, _)| *n == name) else {
        return Err(PresetError::Unknown {
            name: name.to_string(),
            known: PRESET_NAMES.join(", "),
        });
    };
    let preset: Preset =
        serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
    Ok(preset)
}
