//! Tool configuration, loadable from a TOML file.

use serde::{Deserialize, Serialize};

use super::backend::HttpBackendConfig;
use crate::error::{Error, Result};
use crate::leanemit::LeanConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Highest telescoping order tried before marking an identity uncovered.
    pub max_order: u32,
    /// Largest recurrence index checked by the numeric oracle.
    pub n_max: i64,
    /// Worker threads for batch runs.
    pub jobs: usize,
    /// Inclusive parameter sampling range for the numeric oracle.
    pub param_min: i64,
    pub param_max: i64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_order: 4,
            n_max: 20,
            jobs: 4,
            param_min: 1,
            param_max: 5,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub lean: LeanConfig,
    pub backend: HttpBackendConfig,
    pub engine: EngineConfig,
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {}", path.display(), e)))?;
        toml::from_str(&text).map_err(|e| Error::Invalid(format!("bad config: {}", e)))
    }
}
