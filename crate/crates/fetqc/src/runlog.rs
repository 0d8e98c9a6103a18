//! JSON run logs recording versions, arguments, seeds and settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fetqc_core::iqm::catalogue::CATALOGUE_VERSION;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunLog {
    pub tool: &'static str,
    pub version: &'static str,
    pub catalogue_version: &'static str,
    pub command: Vec<String>,
    pub started_unix_ms: u64,
    pub seeds: BTreeMap<String, u64>,
    pub settings: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

impl RunLog {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            catalogue_version: CATALOGUE_VERSION,
            command,
            started_unix_ms: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
            seeds: BTreeMap::new(),
            settings: BTreeMap::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn seed(&mut self, name: &str, v: u64) -> &mut Self {
        self.seeds.insert(name.into(), v);
        self
    }

    pub fn set(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.settings.insert(key.into(), v.to_string());
        self
    }

    pub fn output(&mut self, p: &Path) -> &mut Self {
        self.outputs.push(p.display().to_string());
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}

/// Default log location: `<output>.log.json`, or `run.log.json` inside an
/// output directory.
pub fn default_log_path(output: &Path) -> PathBuf {
    if output.is_dir() {
        output.join("run.log.json")
    } else {
        let mut s = output.as_os_str().to_owned();
        s.push(".log.json");
        PathBuf::from(s)
    }
}
