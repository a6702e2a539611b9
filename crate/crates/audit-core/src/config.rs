//! Run configuration and the seed-code cache directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::BackendConfig;
use crate::prompt::{DebiasMethod, SeedCode, TaskKind};
use crate::registry::ProviderId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown task slug `{0}`")]
    UnknownTask(String),
    #[error("unknown debias method `{0}`")]
    UnknownDebias(String),
    #[error("seed file {0} has no metadata sidecar")]
    MissingSidecar(PathBuf),
}

/// Everything an audit run needs beyond the registry itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub backends: Vec<BackendConfig>,
    /// Empty means all six tasks.
    #[serde(default)]
    pub tasks: Vec<TaskKind>,
    /// Scenario-id filter; empty means every scenario in the registry.
    #[serde(default)]
    pub scenarios: Vec<String>,
    /// Debias variants to add next to the Original prompts.
    #[serde(default)]
    pub debias: Vec<DebiasMethod>,
    #[serde(default = "default_true")]
    pub include_none: bool,
    #[serde(default = "default_subject_language")]
    pub subject_language: String,
    #[serde(default = "default_markers")]
    pub markers: Vec<String>,
    #[serde(default = "default_b")]
    pub bootstrap_b: usize,
    #[serde(default)]
    pub rng_seed: u64,
    /// Seed-code cache directory (see [`SeedStore`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_dir: Option<PathBuf>,
    /// Sample a small evaluation subset instead of the full
    /// Cartesian plan.
    #[serde(default)]
    pub debias_subset: bool,
    /// Ask a backend to identify providers for unmatched snippets.
    #[serde(default)]
    pub fallback_enabled: bool,
}

fn default_true() -> bool {
    true
}

fn default_subject_language() -> String {
    "python".to_string()
}

fn default_markers() -> Vec<String> {
    crate::analyzer::DEFAULT_MARKERS
        .iter()
        .map(|m| m.to_string())
        .collect()
}

fn default_b() -> usize {
    1000
}

impl AuditConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn effective_tasks(&self) -> Vec<TaskKind> {
        if self.tasks.is_empty() {
            TaskKind::ALL.to_vec()
        } else {
            self.tasks.clone()
        }
    }
}

/// Sidecar metadata next to each cached seed file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetadata {
    pub service: String,
    pub provider: String,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_model: Option<String>,
}

/// Seed-code cache: `<dir>/<scenario_id>/<service_slug>.py` with a
/// `<service_slug>.json` sidecar.
#[derive(Debug, Clone, Default)]
pub struct SeedStore {
    seeds: BTreeMap<String, Vec<SeedCode>>,
}

impl SeedStore {
    pub fn load(dir: &Path) -> Result<Self, ConfigError> {
        let mut seeds: BTreeMap<String, Vec<SeedCode>> = BTreeMap::new();
        let mut scenario_dirs: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        scenario_dirs.sort();
        for scenario_dir in scenario_dirs {
            let scenario_id = scenario_dir
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            let mut code_files: Vec<PathBuf> = std::fs::read_dir(&scenario_dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "py"))
                .collect();
            code_files.sort();
            for code_file in code_files {
                let sidecar = code_file.with_extension("json");
                if !sidecar.exists() {
                    return Err(ConfigError::MissingSidecar(code_file));
                }
                let meta: SeedMetadata =
                    serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?;
                let text = std::fs::read_to_string(&code_file)?;
                seeds.entry(scenario_id.clone()).or_default().push(SeedCode {
                    text: text.trim_end().to_string(),
                    source_service: meta.service,
                    source_provider: ProviderId::new(&meta.provider),
                    verified: meta.verified,
                    generator_model: meta.generator_model,
                });
            }
        }
        Ok(SeedStore { seeds })
    }

    pub fn seeds_for(&self, scenario_id: &str) -> &[SeedCode] {
        self.seeds
            .get(scenario_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn minimal_config_fills_defaults() {
        let json = r#"{"backends": []}"#;
        let config: AuditConfig = serde_json::from_str(json).unwrap();
        assert!(config.include_none);
        assert_eq!(config.subject_language, "python");
        assert_eq!(config.markers, ["def", "return", "import"]);
        assert_eq!(config.bootstrap_b, 1000);
        assert_eq!(config.effective_tasks().len(), 6);
    }

    #[test]
    fn seed_store_reads_sidecars() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = dir.path().join("speech-recognition");
        fs::create_dir(&scenario).unwrap();
        fs::write(scenario.join("dragonfly.py"), "import dragonfly\n").unwrap();
        fs::write(
            scenario.join("dragonfly.json"),
            r#"{"service": "Dragonfly", "provider": "Nuance", "verified": true}"#,
        )
        .unwrap();
        let store = SeedStore::load(dir.path()).unwrap();
        let seeds = store.seeds_for("speech-recognition");
        assert_eq!(seeds.len(), 1);
        assert_eq!(seeds[0].source_provider.as_str(), "Nuance");
        assert!(seeds[0].verified);
    }

    #[test]
    fn seed_without_sidecar_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = dir.path().join("s");
        fs::create_dir(&scenario).unwrap();
        fs::write(scenario.join("orphan.py"), "x = 1\n").unwrap();
        assert!(matches!(
            SeedStore::load(dir.path()),
            Err(ConfigError::MissingSidecar(_))
        ));
    }
}
