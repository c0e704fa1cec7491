//! Config resolution: JSON file plus flag overrides, validated before any
//! compute. Unknown keys are rejected with a message naming the key.

use clap::Args;
use serde::Deserialize;
use std::path::PathBuf;

/// Fully resolved invocation: which experiment, its parameter object, where
/// to write, and the master seed. Echoed into every report via the params.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub command: String,
    pub params: serde_json::Value,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// On-disk shape of `--config` files.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory for reports and CSV artifacts
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn load_config_file(path: &PathBuf) -> Result<ConfigFile, ConfigError> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&body).map_err(|e| ConfigError(format!("invalid config file: {e}")))
}

/// Merge file params with flag overrides and deserialize into the target
/// config type; serde's deny_unknown_fields names any offending key.
pub fn resolve_params<T: serde::de::DeserializeOwned + serde::Serialize>(
    file: &ConfigFile,
    expected_command: &str,
    overrides: serde_json::Map<String, serde_json::Value>,
) -> Result<T, ConfigError> {
    if let Some(cmd) = &file.command
        && cmd != expected_command {
            return Err(ConfigError(format!(
                "config file names command {cmd:?} but {expected_command:?} was invoked"
            )));
        }
    let mut params = match &file.params {
        Some(serde_json::Value::Object(map)) => map.clone(),
        Some(other) => {
            return Err(ConfigError(format!("params must be a JSON object, got {other}")));
        }
        None => serde_json::Map::new(),
    };
    if let Some(seed) = file.seed {
        params.entry("seed".to_string()).or_insert(serde_json::json!(seed));
    }
    for (k, v) in overrides {
        params.insert(k, v);
    }
    serde_json::from_value(serde_json::Value::Object(params))
        .map_err(|e| ConfigError(format!("invalid parameters: {e}")))
}

/// Insert `key: value` into an override map when the flag was given.
pub fn push_override<T: serde::Serialize>(
    map: &mut serde_json::Map<String, serde_json::Value>,
    key: &str,
    value: &Option<T>,
) {
    if let Some(v) = value {
        map.insert(key.to_string(), serde_json::to_value(v).expect("flag serializes"));
    }
}
