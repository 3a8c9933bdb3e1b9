use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// What a command read, which parameters it overrode, and what it wrote.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub spec: Option<PathBuf>,
    pub game: Option<PathBuf>,
    pub allocation: Option<PathBuf>,
    pub overrides: BTreeMap<String, serde_json::Value>,
    pub seed: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        RunManifest { command: command.into(), seed: format!("{seed:#X}"), ..Default::default() }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.overrides.insert(key.into(), serde_json::to_value(value).expect("override serializes"));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        for input in [&self.spec, &self.game, &self.allocation].into_iter().flatten() {
            if !input.exists() {
                return Err(CliError::usage("manifest", format!("input {} does not exist", input.display())));
            }
        }
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|source| CliError::Output { path: path.into(), source })
    }
}
