//! TOML engine configuration with a versioned schema.

use std::path::Path;

use retropop_core::EngineConfig;
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub version: u32,
    #[serde(flatten)]
    pub engine: EngineConfig,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<EngineConfig, Error> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Data(format!("config: {e}")))?;
    if file.version != SCHEMA_VERSION {
        return Err(Error::Data(format!(
            "config schema version {} is not supported (expected {SCHEMA_VERSION})",
            file.version
        )));
    }
    file.engine.validate().map_err(|e| Error::Data(format!("config: {e}")))?;
    Ok(file.engine)
}

pub fn load_config(path: &Path) -> Result<EngineConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// The configuration at `path`, or the built-in default.
pub fn load_or_default(path: Option<&Path>) -> Result<EngineConfig, Error> {
    path.map_or_else(|| Ok(EngineConfig::default()), load_config)
}

pub fn to_toml(config: &EngineConfig) -> String {
    let file = ConfigFile { version: SCHEMA_VERSION, engine: config.clone() };
    toml::to_string(&file).expect("engine config always serialises")
}
