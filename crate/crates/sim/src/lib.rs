//! Experiment harness for `risbf-core`: TOML scenario configs with the two
//! user-layout presets, parallel seeded sweeps, CSV tables and run
//! manifests.

pub mod config;
pub mod manifest;
pub mod sweep;
pub mod table;

pub use config::{load_config, preset, write_config, ConfigError, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] risbf_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl SimError {
    /// Process exit code: 1 for configuration problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Core(risbf_core::Error::Numeric(_)) => 2,
            _ => 1,
        }
    }
}
