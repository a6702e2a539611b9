//! Golden-corpus self-check (`audit selftest`): every bundled snippet must
//! label exactly as its sidecar says.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analyzer::{extract_code, label, AnalyzerError};
use crate::registry::Registry;

use super::OrchestratorError;

/// Sidecar next to each corpus snippet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedLabel {
    pub scenario_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_provider: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_service: Option<String>,
    #[serde(default)]
    pub expect_ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestOutcome {
    pub total: usize,
    pub failures: Vec<String>,
}

impl SelftestOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn selftest(registry: &Registry, corpus_dir: &Path) -> Result<SelftestOutcome, OrchestratorError> {
    let mut snippets: Vec<_> = std::fs::read_dir(corpus_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "py"))
        .collect();
    snippets.sort();

    let mut failures = Vec::new();
    let mut total = 0;
    for snippet in &snippets {
        total += 1;
        let name = snippet
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        let sidecar = snippet.with_extension("json");
        let expected: ExpectedLabel = match std::fs::read_to_string(&sidecar) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(_) => {
                failures.push(format!("{name}: missing sidecar"));
                continue;
            }
        };
        let matcher = registry.fingerprint_index(&expected.scenario_id)?;
        let code = std::fs::read_to_string(snippet)?;
        let outcome = label(&extract_code(&code), &matcher);
        match (outcome, expected.expect_ambiguous) {
            (Err(AnalyzerError::AmbiguousLabel(_)), true) => {}
            (Err(AnalyzerError::AmbiguousLabel(providers)), false) => {
                failures.push(format!("{name}: unexpectedly ambiguous between {providers:?}"));
            }
            (Err(other), _) => failures.push(format!("{name}: {other}")),
            (Ok(got), true) => failures.push(format!(
                "{name}: expected AmbiguousLabel, got {}",
                got.provider.as_str()
            )),
            (Ok(got), false) => {
                if let Some(provider) = &expected.expected_provider {
                    if got.provider.as_str() != provider {
                        failures.push(format!(
                            "{name}: expected provider {provider}, got {}",
                            got.provider.as_str()
                        ));
                        continue;
                    }
                }
                if let Some(service) = &expected.expected_service {
                    if got.service_name.as_deref() != Some(service.as_str()) {
                        failures.push(format!(
                            "{name}: expected service {service}, got {:?}",
                            got.service_name
                        ));
                    }
                }
            }
        }
    }
    Ok(SelftestOutcome { total, failures })
}
