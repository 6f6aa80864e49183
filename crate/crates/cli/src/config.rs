//! Optional TOML configuration file. Command-line flags override config
//! values, which override built-in defaults.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub delta: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub n_students: Option<u64>,
    pub resolution: Option<f64>,
    pub draws: Option<usize>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub strategic: Option<bool>,
    pub relaxed: Option<bool>,
    pub tolerance: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }
}
