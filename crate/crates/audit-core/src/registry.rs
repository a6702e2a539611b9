//! The audit registry: scenarios, functional requirements, services, and
//! the fingerprints used to recognize each provider's service in code.
//!
//! The registry is one human-editable JSON document, immutable after load
//! and safe to share read-only across workers.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved label for responses that use no third-party service.
pub const PROVIDER_NONE: &str = "None";
/// Reserved label for open third-party libraries with no identifiable
/// corporate provider.
pub const PROVIDER_PYTHON_LIBRARY: &str = "Python Library";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed registry file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("registry validation failed at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

fn validation(path: impl Into<String>, message: impl Into<String>) -> RegistryError {
    RegistryError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

/// Canonical provider name. `None` and `Python Library` are reserved
/// sentinels and may not appear as registry providers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProviderId(pub String);

impl ProviderId {
    pub fn new(name: impl Into<String>) -> Self {
        ProviderId(name.into())
    }

    pub fn none() -> Self {
        ProviderId(PROVIDER_NONE.to_string())
    }

    pub fn python_library() -> Self {
        ProviderId(PROVIDER_PYTHON_LIBRARY.to_string())
    }

    pub fn is_sentinel(&self) -> bool {
        self.0 == PROVIDER_NONE || self.0 == PROVIDER_PYTHON_LIBRARY
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProviderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FingerprintKind {
    /// Exact module name appearing in an import statement.
    LibraryImport,
    /// Substring pattern over URLs, with a single `*` wildcard allowed.
    UrlTemplate,
    /// Case-insensitive token matched on word boundaries.
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub kind: FingerprintKind,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceEntry {
    pub service_name: String,
    pub provider: ProviderId,
    pub fingerprints: Vec<Fingerprint>,
    /// Subject-language tags this service supports. Empty means "defaults
    /// to the harness's configured subject language".
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub subject_language_support: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub title: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub name: String,
    pub requirements: Vec<Requirement>,
    pub services: Vec<ServiceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub scenarios: Vec<Scenario>,
}

impl Registry {
    /// Load and validate a registry document.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&raw)
    }

    pub fn from_json(raw: &str) -> Result<Self, RegistryError> {
        let registry: Registry = serde_json::from_str(raw)?;
        registry.validate()?;
        Ok(registry)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    /// SHA-256 of the canonical serialization, recorded in run manifests.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        hex_string(&hasher.finalize())
    }

    pub fn scenario(&self, scenario_id: &str) -> Result<&Scenario, RegistryError> {
        self.scenarios
            .iter()
            .find(|s| s.id == scenario_id)
            .ok_or_else(|| RegistryError::UnknownScenario(scenario_id.to_string()))
    }

    pub fn scenario_by_name(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Services registered under a scenario, in registry file order.
    pub fn services_for(&self, scenario_id: &str) -> Result<&[ServiceEntry], RegistryError> {
        Ok(&self.scenario(scenario_id)?.services)
    }

    /// Matcher restricted to the fingerprints of one scenario's services.
    pub fn fingerprint_index(&self, scenario_id: &str) -> Result<ScopedMatcher, RegistryError> {
        let scenario = self.scenario(scenario_id)?;
        Ok(ScopedMatcher::for_scenario(scenario))
    }

    /// All distinct non-sentinel providers in the registry.
    pub fn providers(&self) -> BTreeSet<&ProviderId> {
        self.scenarios
            .iter()
            .flat_map(|s| s.services.iter().map(|e| &e.provider))
            .collect()
    }

    pub fn validate(&self) -> Result<(), RegistryError> {
        let mut scenario_ids = BTreeSet::new();
        for scenario in &self.scenarios {
            let at = format!("scenarios/{}", scenario.id);
            if scenario.id.is_empty() || scenario.name.is_empty() {
                return Err(validation(&at, "scenario id and name must be non-empty"));
            }
            if !scenario_ids.insert(&scenario.id) {
                return Err(validation(&at, "duplicate scenario id"));
            }
            if scenario.requirements.is_empty() {
                return Err(validation(&at, "scenario needs at least one requirement"));
            }
            if scenario.services.is_empty() {
                return Err(validation(&at, "scenario needs at least one service"));
            }
            if scenario.services.len() < 5 {
                log::warn!(
                    "scenario `{}` has only {} services (fewer than 5)",
                    scenario.id,
                    scenario.services.len()
                );
            }
            let mut requirement_ids = BTreeSet::new();
            for requirement in &scenario.requirements {
                let at = format!("{at}/requirements/{}", requirement.id);
                if requirement.description.is_empty() {
                    return Err(validation(&at, "requirement description must be non-empty"));
                }
                if !requirement_ids.insert(&requirement.id) {
                    return Err(validation(&at, "duplicate requirement id within scenario"));
                }
            }
            let mut pairs = BTreeSet::new();
            for service in &scenario.services {
                let at = format!("{at}/services/{}", service.service_name);
                if service.provider.0.is_empty() {
                    return Err(validation(&at, "provider must be non-empty"));
                }
                if service.provider.is_sentinel() {
                    return Err(validation(
                        &at,
                        format!("`{}` is a reserved sentinel provider", service.provider),
                    ));
                }
                if !pairs.insert((&service.provider, &service.service_name)) {
                    return Err(validation(
                        &at,
                        "duplicate (provider, service-name) pair within scenario",
                    ));
                }
                if service.fingerprints.is_empty() {
                    return Err(validation(&at, "service needs at least one fingerprint"));
                }
                for fp in &service.fingerprints {
                    if fp.pattern.is_empty() {
                        return Err(validation(&at, "fingerprint pattern must be non-empty"));
                    }
                    if fp.kind == FingerprintKind::LibraryImport
                        && fp.pattern.chars().any(char::is_whitespace)
                    {
                        return Err(validation(
                            &at,
                            "library-import pattern may not contain whitespace",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One fingerprint hit inside a snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintMatch {
    pub service_name: String,
    pub provider: ProviderId,
    pub kind: FingerprintKind,
    pub pattern: String,
    /// Position of the service in the scenario's registry order.
    pub registry_index: usize,
}

/// Fingerprint matcher scoped to a single scenario's services.
#[derive(Debug, Clone)]
pub struct ScopedMatcher {
    pub scenario_id: String,
    entries: Vec<(usize, String, ProviderId, Fingerprint)>,
}

impl ScopedMatcher {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let mut entries = Vec::new();
        for (idx, service) in scenario.services.iter().enumerate() {
            for fp in &service.fingerprints {
                entries.push((
                    idx,
                    service.service_name.clone(),
                    service.provider.clone(),
                    fp.clone(),
                ));
            }
        }
        ScopedMatcher {
            scenario_id: scenario.id.clone(),
            entries,
        }
    }

    /// All fingerprint hits in `code`, ordered by kind priority
    /// (import > URL > keyword) then registry order.
    pub fn matches(&self, code: &str) -> Vec<FingerprintMatch> {
        let imports = imported_modules(code);
        let lowered = code.to_lowercase();
        let mut hits: Vec<FingerprintMatch> = self
            .entries
            .iter()
            .filter(|(_, _, _, fp)| match fp.kind {
                FingerprintKind::LibraryImport => imports
                    .iter()
                    .any(|m| m == &fp.pattern || m.starts_with(&format!("{}.", fp.pattern))),
                FingerprintKind::UrlTemplate => wildcard_contains(code, &fp.pattern),
                FingerprintKind::Keyword => {
                    keyword_match(&lowered, &fp.pattern.to_lowercase())
                }
            })
            .map(|(idx, name, provider, fp)| FingerprintMatch {
                service_name: name.clone(),
                provider: provider.clone(),
                kind: fp.kind,
                pattern: fp.pattern.clone(),
                registry_index: *idx,
            })
            .collect();
        hits.sort_by_key(|m| (kind_priority(m.kind), m.registry_index));
        hits
    }
}

fn kind_priority(kind: FingerprintKind) -> u8 {
    match kind {
        FingerprintKind::LibraryImport => 0,
        FingerprintKind::UrlTemplate => 1,
        FingerprintKind::Keyword => 2,
    }
}

/// Dotted module paths imported by a Python snippet.
pub fn imported_modules(code: &str) -> Vec<String> {
    let mut modules = Vec::new();
    for line in code.lines() {
        let line = line.trim_start();
        if let Some(rest) = line.strip_prefix("import ") {
            // `import a.b as c, d`
            for part in rest.split(',') {
                let module = part.trim().split_whitespace().next().unwrap_or("");
                if !module.is_empty() {
                    modules.push(module.to_string());
                }
            }
        } else if let Some(rest) = line.strip_prefix("from ") {
            if let Some(module) = rest.split_whitespace().next() {
                modules.push(module.to_string());
            }
        }
    }
    modules
}

/// Substring containment with a single `*` wildcard: the pieces around the
/// wildcard must occur left-to-right without overlap.
pub fn wildcard_contains(text: &str, pattern: &str) -> bool {
    match pattern.split_once('*') {
        None => text.contains(pattern),
        Some((prefix, suffix)) => {
            let mut from = 0;
            while let Some(pos) = text[from..].find(prefix) {
                let after = from + pos + prefix.len();
                if text[after..].contains(suffix) {
                    return true;
                }
                if prefix.is_empty() {
                    break;
                }
                from = from + pos + 1;
            }
            false
        }
    }
}

/// Case-insensitive word-boundary match; both inputs pre-lowered.
fn keyword_match(lowered_text: &str, lowered_keyword: &str) -> bool {
    let boundary = |c: Option<char>| c.map_or(true, |c| !c.is_alphanumeric() && c != '_');
    let mut from = 0;
    while let Some(pos) = lowered_text[from..].find(lowered_keyword) {
        let start = from + pos;
        let end = start + lowered_keyword.len();
        if boundary(lowered_text[..start].chars().next_back())
            && boundary(lowered_text[end..].chars().next())
        {
            return true;
        }
        from = start + 1;
    }
    false
}
