//! Subcommand implementations.

pub mod figure1;
pub mod grw_run;
pub mod helstrom;
pub mod massdensity;
pub mod scan;
pub mod verify;

use std::fmt;
use std::path::Path;

use anyhow::Result;
use grwlab_core::grw::GrwConfig;

/// Config file failures (missing file, bad TOML, schema violations) map to
/// exit code 2.
#[derive(Debug)]
pub struct ConfigLoadError(pub String);

impl fmt::Display for ConfigLoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigLoadError {}

/// Reads and validates a GRW config TOML.
pub fn load_grw_config(path: &Path) -> Result<GrwConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigLoadError(format!("reading {}: {e}", path.display())))?;
    let config: GrwConfig = toml::from_str(&text)
        .map_err(|e| ConfigLoadError(format!("parsing {}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
