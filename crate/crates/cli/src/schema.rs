//! Strict JSON scenario format.
//!
//! ```json
//! {
//!   "plant": {"tau": 0.1, "r": 5e19, "alpha": 1e19},
//!   "actuator": {"t_c": 0.014285714285714285, "t_prep": 0.0, "mode": "centrifuge"},
//!   "controller": {"variant": "NM", "delta": 1.569e16},
//!   "init": {"x0": 5e19, "xi0": 0.0},
//!   "sim": {"t_end": 1.0, "samples_per_tick": 10}
//! }
//! ```
//!
//! `alpha` may be replaced by the pair `m_p` (particles per pellet) and
//! `volume` (m³). Unknown keys are rejected.

use pelletctl_core::{
    ActuatorMode, ActuatorSpec, ControllerSpec, PlantParams, ScenarioF64, Variant,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub plant: PlantFile,
    pub actuator: ActuatorFile,
    pub controller: ControllerFile,
    pub init: InitFile,
    pub sim: SimFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub tau: f64,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorFile {
    pub t_c: f64,
    #[serde(default)]
    pub t_prep: f64,
    #[serde(default = "centrifuge")]
    pub mode: ActuatorMode,
}

fn centrifuge() -> ActuatorMode {
    ActuatorMode::Centrifuge
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    pub variant: Variant,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    pub x0: f64,
    #[serde(default)]
    pub xi0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFile {
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples_per_tick: u32,
    /// Free-form provenance note; carried in the file only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_note: Option<String>,
}

fn default_samples() -> u32 {
    10
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<ScenarioF64, CliError> {
        let p = self.plant;
        let plant = match (p.alpha, p.m_p, p.volume) {
            (Some(alpha), None, None) => PlantParams::new(p.tau, p.r, alpha)?,
            (None, Some(m_p), Some(volume)) => PlantParams::from_pellet(p.tau, p.r, m_p, volume)?,
            _ => {
                return Err(CliError::Schema(
                    "plant needs either `alpha` or both `m_p` and `volume`".into(),
                ))
            }
        };
        let actuator =
            ActuatorSpec::new(self.actuator.t_c, self.actuator.t_prep, self.actuator.mode)?;
        let controller = ControllerSpec::new(self.controller.variant, self.controller.delta)?;
        let scenario = ScenarioF64 {
            plant,
            actuator,
            controller,
            x0: self.init.x0,
            xi0: self.init.xi0,
            t_end: self.sim.t_end,
            samples_per_tick: self.sim.samples_per_tick,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(s: &ScenarioF64) -> Self {
        Self {
            plant: PlantFile {
                tau: s.plant.tau,
                r: s.plant.r,
                alpha: Some(s.plant.alpha),
                m_p: None,
                volume: None,
            },
            actuator: ActuatorFile {
                t_c: s.actuator.t_c,
                t_prep: s.actuator.t_prep,
                mode: s.actuator.mode,
            },
            controller: ControllerFile {
                variant: s.controller.variant,
                delta: s.controller.delta,
            },
            init: InitFile {
                x0: s.x0,
                xi0: s.xi0,
            },
            sim: SimFile {
                t_end: s.t_end,
                samples_per_tick: s.samples_per_tick,
                seed_note: None,
            },
        }
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioF64, CliError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => CliError::Schema(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    })?;
    file.into_scenario()
}

/// Serializes a scenario in the same schema (with `alpha` given directly).
pub fn emit_scenario(s: &ScenarioF64) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("scenario serializes")
}
