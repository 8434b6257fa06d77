//! TOML run configuration.

use std::path::Path;

use ltx_core::neural::TrainConfig;
use ltx_core::{SampleRanges, SolverConfig, SpacecraftConfig};
use serde::{Deserialize, Serialize};

use crate::error::InputError;

/// Every section is optional and falls back to the defaults.
///
/// ```toml
/// [craft]
/// tmax = 0.3
/// isp = 3000.0
/// m_dry = 800.0
///
/// [ranges]
/// dt_days = [50.0, 500.0]
///
/// [train]
/// max_epochs = 2000
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub craft: SpacecraftConfig,
    pub ranges: SampleRanges,
    pub train: TrainConfig,
    pub solver: SolverConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let cfg: Config = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| InputError(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| InputError(format!("{}: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.craft.validate()?;
        self.ranges.validate(&self.craft)?;
        self.train.validate()?;
        Ok(())
    }
}
