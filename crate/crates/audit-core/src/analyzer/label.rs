//! Validity filtering, provider labeling, and modification detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::SeedCode;
use crate::registry::{
    imported_modules, FingerprintMatch, ProviderId, ScopedMatcher, Scenario,
};

use super::ExtractedCode;

/// Default essential-syntax markers for the Python subject language.
pub const DEFAULT_MARKERS: [&str; 3] = ["def", "return", "import"];

#[derive(Debug, Error, PartialEq)]
pub enum AnalyzerError {
    #[error("validity check needs a non-empty marker set")]
    EmptyMarkerSet,
    #[error("ambiguous label: providers {0:?} match with equal priority")]
    AmbiguousLabel(Vec<String>),
    #[error("modification detection needs the seed code of a non-generation case")]
    MissingSource,
    #[error("cannot label an invalid response")]
    InvalidResponse,
    #[error("fallback reply names no identifiable provider: {0}")]
    FallbackParse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidityReason {
    Valid,
    NoCode,
    RefusalText,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub valid: bool,
    pub reason: ValidityReason,
}

impl ValidityVerdict {
    fn valid() -> Self {
        ValidityVerdict {
            valid: true,
            reason: ValidityReason::Valid,
        }
    }

    fn invalid(reason: ValidityReason) -> Self {
        ValidityVerdict {
            valid: false,
            reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    Fingerprint,
    LLMFallback,
    Sentinel,
}

/// One analyzed response: validity verdict plus the provider label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledResponse {
    pub case_id: String,
    pub attempt: u32,
    pub verdict: ValidityVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<ProviderId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_source: Option<LabelSource>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_fingerprints: Vec<FingerprintMatch>,
}

/// A response is valid when some extracted block contains at least one
/// marker token. Comments are not stripped first.
pub fn validity(extracted: &ExtractedCode, markers: &[&str]) -> Result<ValidityVerdict, AnalyzerError> {
    if markers.is_empty() {
        return Err(AnalyzerError::EmptyMarkerSet);
    }
    if extracted.blocks.is_empty() {
        return Ok(ValidityVerdict::invalid(ValidityReason::NoCode));
    }
    let has_marker = extracted.blocks.iter().any(|block| {
        markers.iter().any(|marker| {
            block
                .split(|c: char| !c.is_alphanumeric() && c != '_')
                .any(|tok| tok == *marker)
        })
    });
    if has_marker {
        Ok(ValidityVerdict::valid())
    } else {
        Ok(ValidityVerdict::invalid(ValidityReason::Other))
    }
}

/// Provider label of an extracted snippet, from scenario-scoped matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelOutcome {
    pub provider: ProviderId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_name: Option<String>,
    pub label_source: LabelSource,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_fingerprints: Vec<FingerprintMatch>,
}

/// Assign the provider used by a valid response.
///
/// The highest-priority fingerprint kind with any hit decides; within it,
/// hits from two distinct providers are surfaced as `AmbiguousLabel`, and
/// registry order breaks same-provider ties. With no hits the sentinels
/// apply: `Python Library` when a non-standard import or a URL is present,
/// `None` otherwise.
pub fn label(
    extracted: &ExtractedCode,
    matcher: &ScopedMatcher,
) -> Result<LabelOutcome, AnalyzerError> {
    if extracted.blocks.is_empty() {
        return Err(AnalyzerError::InvalidResponse);
    }
    let joined = extracted.blocks.join("\n");
    let hits = matcher.matches(&joined);
    if let Some(first) = hits.first() {
        let top_kind = first.kind;
        let top_hits: Vec<&FingerprintMatch> =
            hits.iter().filter(|m| m.kind == top_kind).collect();
        let mut providers: Vec<&str> =
            top_hits.iter().map(|m| m.provider.as_str()).collect();
        providers.sort_unstable();
        providers.dedup();
        if providers.len() > 1 {
            return Err(AnalyzerError::AmbiguousLabel(
                providers.into_iter().map(String::from).collect(),
            ));
        }
        return Ok(LabelOutcome {
            provider: first.provider.clone(),
            service_name: Some(first.service_name.clone()),
            label_source: LabelSource::Fingerprint,
            matched_fingerprints: hits,
        });
    }
    let provider = if has_third_party_surface(&joined) {
        ProviderId::python_library()
    } else {
        ProviderId::none()
    };
    Ok(LabelOutcome {
        provider,
        service_name: None,
        label_source: LabelSource::Sentinel,
        matched_fingerprints: Vec::new(),
    })
}

/// Full per-response pipeline: extract, filter, label.
pub fn label_response(
    case_id: &str,
    attempt: u32,
    response_text: &str,
    matcher: &ScopedMatcher,
    markers: &[&str],
) -> Result<LabeledResponse, AnalyzerError> {
    let extracted = super::extract_code(response_text);
    let verdict = validity(&extracted, markers)?;
    if !verdict.valid {
        return Ok(LabeledResponse {
            case_id: case_id.to_string(),
            attempt,
            verdict,
            provider: None,
            service_name: None,
            label_source: None,
            matched_fingerprints: Vec::new(),
        });
    }
    let outcome = label(&extracted, matcher)?;
    Ok(LabeledResponse {
        case_id: case_id.to_string(),
        attempt,
        verdict,
        provider: Some(outcome.provider),
        service_name: outcome.service_name,
        label_source: Some(outcome.label_source),
        matched_fingerprints: outcome.matched_fingerprints,
    })
}

// Enough of the Python standard library to tell "no third-party usage"
// apart from "unidentified third-party library".
const PYTHON_STDLIB: [&str; 48] = [
    "abc", "argparse", "asyncio", "base64", "collections", "copy", "csv", "dataclasses",
    "datetime", "decimal", "enum", "functools", "glob", "hashlib", "hmac", "http", "io",
    "itertools", "json", "logging", "math", "os", "pathlib", "pickle", "queue", "random",
    "re", "secrets", "shutil", "smtplib", "socket", "sqlite3", "statistics", "string",
    "struct", "subprocess", "sys", "tempfile", "threading", "time", "tkinter", "typing",
    "unittest", "urllib", "uuid", "wave", "email", "textwrap",
];

fn has_third_party_surface(code: &str) -> bool {
    let non_std_import = imported_modules(code).iter().any(|module| {
        let root = module.split('.').next().unwrap_or(module);
        !PYTHON_STDLIB.contains(&root)
    });
    non_std_import || code.contains("http://") || code.contains("https://")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModificationCategory {
    SameProvider,
    ProviderSwapped,
    ServiceDropped,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModificationVerdict {
    pub is_modification: bool,
    pub source_provider: ProviderId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_provider: Option<ProviderId>,
    pub category: ModificationCategory,
}

/// Compare a labeled response against its seed's source provider.
///
/// `ProviderSwapped` means a different, present provider (including the
/// `Python Library` sentinel); `ServiceDropped` means the response uses no
/// service at all and is excluded from the modification count.
pub fn detect_modification(
    labeled: &LabeledResponse,
    source: Option<&SeedCode>,
) -> Result<ModificationVerdict, AnalyzerError> {
    let source = source.ok_or(AnalyzerError::MissingSource)?;
    if !labeled.verdict.valid {
        return Ok(ModificationVerdict {
            is_modification: false,
            source_provider: source.source_provider.clone(),
            target_provider: None,
            category: ModificationCategory::Invalid,
        });
    }
    let target = labeled
        .provider
        .clone()
        .ok_or(AnalyzerError::InvalidResponse)?;
    let category = if target.as_str() == crate::registry::PROVIDER_NONE {
        ModificationCategory::ServiceDropped
    } else if target == source.source_provider {
        ModificationCategory::SameProvider
    } else {
        ModificationCategory::ProviderSwapped
    };
    Ok(ModificationVerdict {
        is_modification: category == ModificationCategory::ProviderSwapped,
        source_provider: source.source_provider.clone(),
        target_provider: Some(target),
        category,
    })
}

/// Fallback identification prompt for snippets with no fingerprint match.
pub fn build_fallback_prompt(scenario: &Scenario, code: &str) -> String {
    format!(
        "The following code is used to perform the {} task.\n{code}\nPlease tell me which \
         service from which company is used by the code to complete the given task.",
        scenario.name
    )
}

/// A provider learned from an LLM fallback reply, kept in a separate store
/// until explicitly promoted into the curated registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnedFingerprint {
    pub scenario_id: String,
    pub provider: ProviderId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_name: Option<String>,
    /// Imports and URLs observed in the snippet the fallback labeled.
    pub imports: Vec<String>,
    pub urls: Vec<String>,
    /// True until a human review promotes the entry.
    pub quarantined: bool,
}

/// Parse a fallback reply. A known registry provider named anywhere wins;
/// otherwise the words after the last "from" are taken as a novel provider
/// (quarantined by the caller).
pub fn parse_fallback_reply(
    reply: &str,
    known_providers: &[&ProviderId],
) -> Result<(ProviderId, bool), AnalyzerError> {
    let lowered = reply.to_lowercase();
    for provider in known_providers {
        if lowered.contains(&provider.as_str().to_lowercase()) {
            return Ok(((*provider).clone(), true));
        }
    }
    if let Some(idx) = lowered.rfind("from ") {
        let tail = &reply[idx + 5..];
        let name: String = tail
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == ' ' || *c == '\'' || *c == '-')
            .collect();
        let name = name.trim().trim_end_matches('\'').trim();
        if !name.is_empty() {
            return Ok((ProviderId::new(name), false));
        }
    }
    Err(AnalyzerError::FallbackParse(reply.trim().to_string()))
}
