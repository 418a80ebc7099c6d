//! `manifest.toml`, written next to a run's outputs.

use forage_core::SimConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub checkpoint_version: u32,
    pub seed: u64,
    pub n_steps: u64,
    pub record_every: u64,
    pub frame_every: u64,
    /// Hex SHA-256 of the canonical config text.
    pub config_hash: String,
    /// Fully defaulted copy of the config the run used.
    pub config: SimConfig,
}

impl Manifest {
    pub fn new(config: &SimConfig, record_every: u64, frame_every: u64) -> Self {
        Manifest {
            manifest_version: MANIFEST_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            checkpoint_version: forage_core::checkpoint::VERSION,
            seed: config.seed,
            n_steps: config.n_steps,
            record_every,
            frame_every,
            config_hash: config.hash().iter().map(|b| format!("{b:02x}")).collect(),
            config: config.effective(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest always serializes")
    }
}
