//! Session manifest: everything needed to regenerate or reinterpret an
//! artifact directory. Deliberately free of wall-clock data so reruns are
//! byte-identical.

use anyhow::{Context, Result};
use exoeval_core::synth::SessionSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::config::DeviceConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Tool version that wrote the directory.
    pub version: String,
    /// Seed the artifacts were generated from (same as `session.seed`).
    pub seed: u64,
    pub session: SessionSpec,
    pub device: DeviceConfig,
}

impl Manifest {
    pub fn new(session: SessionSpec, device: DeviceConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: session.seed,
            session,
            device,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing manifest")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
