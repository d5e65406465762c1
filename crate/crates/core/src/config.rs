//! One configuration file for every experiment. Each section mirrors a
//! module's parameter type; missing sections take defaults and unknown keys
//! are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitParams;
use crate::destruct::MechanismConfig;
use crate::puf::{EvalTimeModel, FilterPolicy, PufCalibration};
use crate::randomness::SuiteParams;
use crate::scheduler::{DramGeometry, EnergyParams, TimingParams};
use crate::variation::{EsaCalibration, PvSpec, VariationModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax")]
    Syntax(#[from] toml::de::Error),
    #[error("config section [{section}]: {reason}")]
    Invalid { section: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Device identity: offsets and every other fixed per-device draw.
    pub seed: u64,
    /// Per-read noise.
    pub read_seed: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { seed: 1, read_seed: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Seeds,
    pub circuit: CircuitParams,
    pub variation: VariationModel,
    pub esa: EsaCalibration,
    pub pv: PvSpec,
    pub puf: PufCalibration,
    pub filter: FilterPolicy,
    pub eval_time: EvalTimeModel,
    pub nist: SuiteParams,
    pub geometry: DramGeometry,
    pub timings: TimingParams,
    pub energy: EnergyParams,
    pub mechanism: MechanismConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: Seeds::default(),
            circuit: CircuitParams::default(),
            variation: VariationModel::default(),
            esa: EsaCalibration::default(),
            pv: PvSpec { pv_percent: 4.0, temperature_c: 30.0 },
            puf: PufCalibration::default(),
            filter: FilterPolicy::default(),
            eval_time: EvalTimeModel::default(),
            nist: SuiteParams::default(),
            geometry: DramGeometry::default(),
            timings: TimingParams::default(),
            energy: EnergyParams::default(),
            mechanism: MechanismConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn sec<E: std::fmt::Display>(section: &'static str, r: Result<(), E>) -> Result<(), ConfigError> {
            r.map_err(|e| ConfigError::Invalid { section, reason: e.to_string() })
        }
        sec("circuit", self.circuit.validate(1))?;
        sec("variation", self.variation.validate())?;
        sec("pv", PvSpec::new(self.pv.pv_percent, self.pv.temperature_c).map(|_| ()))?;
        sec("puf", self.puf.validate())?;
        sec("filter", self.filter.validate())?;
        sec("geometry", self.geometry.validate())?;
        sec("timings", self.timings.validate())?;
        sec("mechanism", self.mechanism.validate())?;
        Ok(())
    }
}
