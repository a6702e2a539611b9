//! Deterministic aggregation of a persisted run into a bias report.
//! Everything is recomputed from the JSONL records; re-running on an
//! unchanged run directory yields byte-identical output.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use audit_stats::{spearman, welch_t};
use serde::{Deserialize, Serialize};

use crate::analyzer::{
    extract_code, label, label_response, AnalyzerError, ExtractedCode, LabeledResponse,
    ModificationCategory,
};
use crate::gateway::RunStore;
use crate::metrics::{ModificationTally, ProviderCountVector};
use crate::prompt::{parse_ranking_reply, DebiasMethod, PromptCase, TaskKind};
use crate::registry::Registry;

use super::run::{MANIFEST_FILE, PLAN_FILE};
use super::{OrchestratorError, Plan, RunManifest, RANK_TASK_SLUG};

pub const LABELED_FILE: &str = "labeled.jsonl";

/// Per-(backend, scenario) Gini row. Emitted once per denominator
/// convention so both readings of the `None` sentinel are on record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiRow {
    pub backend_id: String,
    pub scenario_id: String,
    pub include_none: bool,
    /// Distinct providers present (the n the GI range depends on).
    pub n: usize,
    pub responses: u64,
    pub gini: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub b: usize,
    pub rng_seed: u64,
}

/// Per-(backend, task, debias) modification row, with both denominator
/// conventions: valid-minus-dropped (the headline MR) and all queried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrRow {
    pub backend_id: String,
    pub task: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debias: Option<String>,
    pub n_m: u64,
    pub n: u64,
    pub dropped: u64,
    pub invalid: u64,
    pub queried: u64,
    /// N_m / N as an exact 2-decimal percent string.
    pub mr_percent: String,
    pub mr: f64,
    /// N_m over all queried cases, the stricter denominator.
    pub mr_all_queried: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub b: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferredRow {
    pub backend_id: String,
    pub scenario_id: String,
    /// All argmax providers; more than one means an unbroken tie.
    pub providers: Vec<String>,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapRow {
    pub backend_id: String,
    pub source_provider: String,
    pub target_provider: String,
    pub count: u64,
}

/// One Table-2-shaped comparison row: a debias method against Original.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasRow {
    pub backend_id: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mr_percent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mr: Option<f64>,
    /// Welch t against the Original per-case modification indicators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_stat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanRow {
    pub backend_id: String,
    pub scenario_id: String,
    pub stated_ranking: Vec<String>,
    pub generation_ranking: Vec<String>,
    pub rho: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvalidRow {
    pub backend_id: String,
    pub reason: String,
    pub count: u64,
}

/// An equal-priority multi-provider match, surfaced instead of guessed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousRecord {
    pub case_id: String,
    pub attempt: u32,
    pub providers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub include_none_default: bool,
    pub markers: Vec<String>,
    pub b: usize,
    pub rng_seed: u64,
    pub mr_denominator: String,
    pub multiple_counting: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub run_id: String,
    pub registry_hash: String,
    pub conventions: Conventions,
    pub gi_rows: Vec<GiRow>,
    pub mr_rows: Vec<MrRow>,
    pub preferred: Vec<PreferredRow>,
    pub swaps: Vec<SwapRow>,
    pub debias: Vec<DebiasRow>,
    pub spearman: Vec<SpearmanRow>,
    pub invalid: Vec<InvalidRow>,
    pub ambiguous: Vec<AmbiguousRecord>,
}

pub fn analyze(run_dir: &Path, registry: &Registry) -> Result<BiasReport, OrchestratorError> {
    let manifest_path = run_dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(OrchestratorError::MissingRunData(format!(
            "{} not found",
            manifest_path.display()
        )));
    }
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
    if manifest.registry_hash != registry.content_hash() {
        return Err(OrchestratorError::MissingRunData(
            "registry does not match the one recorded in the run manifest".into(),
        ));
    }
    let plan_path = run_dir.join(PLAN_FILE);
    if !plan_path.exists() {
        return Err(OrchestratorError::MissingRunData(format!(
            "{} not found",
            plan_path.display()
        )));
    }
    let plan: Plan = serde_json::from_str(&fs::read_to_string(&plan_path)?)?;
    let cases: HashMap<&str, &PromptCase> =
        plan.cases.iter().map(|c| (c.case_id.as_str(), c)).collect();

    let store = RunStore::open(run_dir)?;
    let mut responses = store.load_all()?;
    responses.sort_by(|a, b| {
        (&a.backend_id, &a.case_id, a.attempt).cmp(&(&b.backend_id, &b.case_id, b.attempt))
    });

    let markers: Vec<&str> = manifest.markers.iter().map(String::as_str).collect();
    let b = manifest.bootstrap_b;
    let rng_seed = manifest.rng_seed;

    let mut matchers = BTreeMap::new();
    for scenario in &registry.scenarios {
        matchers.insert(scenario.id.clone(), registry.fingerprint_index(&scenario.id)?);
    }

    // label every persisted response
    let mut labeled: Vec<(LabeledResponse, String)> = Vec::new(); // (label, backend_id)
    let mut ambiguous = Vec::new();
    let mut invalid_counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for response in &responses {
        let Some(case) = cases.get(response.case_id.as_str()) else {
            // ranking traffic is parsed separately
            continue;
        };
        let matcher = matchers
            .get(&case.scenario_id)
            .ok_or_else(|| OrchestratorError::MissingRunData(case.scenario_id.clone()))?;
        if case.debias == Some(DebiasMethod::Multiple) {
            // each block of a Multiple response is labeled and counted once
            let extracted = extract_code(&response.response_text);
            for block in &extracted.blocks {
                let one = ExtractedCode {
                    blocks: vec![block.clone()],
                    extraction_method: extracted.extraction_method,
                };
                match label(&one, matcher) {
                    Ok(outcome) => labeled.push((
                        LabeledResponse {
                            case_id: response.case_id.clone(),
                            attempt: response.attempt,
                            verdict: crate::analyzer::ValidityVerdict {
                                valid: true,
                                reason: crate::analyzer::ValidityReason::Valid,
                            },
                            provider: Some(outcome.provider),
                            service_name: outcome.service_name,
                            label_source: Some(outcome.label_source),
                            matched_fingerprints: outcome.matched_fingerprints,
                        },
                        response.backend_id.clone(),
                    )),
                    Err(AnalyzerError::AmbiguousLabel(providers)) => {
                        ambiguous.push(AmbiguousRecord {
                            case_id: response.case_id.clone(),
                            attempt: response.attempt,
                            providers,
                        });
                    }
                    Err(other) => return Err(other.into()),
                }
            }
            if extracted.blocks.is_empty() {
                *invalid_counts
                    .entry((response.backend_id.clone(), "NoCode".to_string()))
                    .or_insert(0) += 1;
            }
            continue;
        }
        match label_response(
            &response.case_id,
            response.attempt,
            &response.response_text,
            matcher,
            &markers,
        ) {
            Ok(one) => {
                if !one.verdict.valid {
                    *invalid_counts
                        .entry((
                            response.backend_id.clone(),
                            format!("{:?}", one.verdict.reason),
                        ))
                        .or_insert(0) += 1;
                }
                labeled.push((one, response.backend_id.clone()));
            }
            Err(AnalyzerError::AmbiguousLabel(providers)) => {
                ambiguous.push(AmbiguousRecord {
                    case_id: response.case_id.clone(),
                    attempt: response.attempt,
                    providers,
                });
            }
            Err(other) => return Err(other.into()),
        }
    }

    write_labeled(run_dir, &labeled)?;

    // ---- generation tallies -------------------------------------------
    // originals only; debias variants feed the comparison table instead
    let mut generation: BTreeMap<(String, String), ProviderCountVector> = BTreeMap::new();
    let mut generation_excl: BTreeMap<(String, String), ProviderCountVector> = BTreeMap::new();
    for (one, backend_id) in &labeled {
        let case = cases[one.case_id.as_str()];
        if case.task != TaskKind::Generation || case.debias.is_some() || !one.verdict.valid {
            continue;
        }
        let provider = one.provider.as_ref().expect("valid implies provider");
        generation
            .entry((backend_id.clone(), case.scenario_id.clone()))
            .or_insert_with(|| ProviderCountVector::new(&case.scenario_id, backend_id, true))
            .record(provider);
        generation_excl
            .entry((backend_id.clone(), case.scenario_id.clone()))
            .or_insert_with(|| ProviderCountVector::new(&case.scenario_id, backend_id, false))
            .record(provider);
    }

    let mut gi_rows = Vec::new();
    for table in [&generation, &generation_excl] {
        for ((backend_id, scenario_id), vector) in table.iter() {
            if vector.total() == 0 {
                continue;
            }
            let summary = vector.gini_bootstrap(b, rng_seed)?;
            gi_rows.push(GiRow {
                backend_id: backend_id.clone(),
                scenario_id: scenario_id.clone(),
                include_none: vector.include_none,
                n: vector.n(),
                responses: vector.total(),
                gini: summary.point,
                ci_low: summary.ci_low,
                ci_high: summary.ci_high,
                b,
                rng_seed,
            });
        }
    }
    gi_rows.sort_by(|a, b| {
        (&a.backend_id, &a.scenario_id, a.include_none)
            .cmp(&(&b.backend_id, &b.scenario_id, b.include_none))
    });

    let mut preferred = Vec::new();
    for ((backend_id, scenario_id), vector) in &generation {
        if let Ok(winners) = vector.preferred_provider() {
            let top = vector
                .counts
                .get(&winners[0])
                .copied()
                .unwrap_or(0);
            preferred.push(PreferredRow {
                backend_id: backend_id.clone(),
                scenario_id: scenario_id.clone(),
                providers: winners.iter().map(|p| p.as_str().to_string()).collect(),
                share: top as f64 / vector.total() as f64,
            });
        }
    }

    // ---- modification tallies -----------------------------------------
    // indicator vectors feed both the bootstrap and the debias t-tests
    let mut modification: BTreeMap<(String, String, Option<String>), Cell> = BTreeMap::new();
    let mut swaps: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for (one, backend_id) in &labeled {
        let case = cases[one.case_id.as_str()];
        if case.task == TaskKind::Generation {
            continue;
        }
        let key = (
            backend_id.clone(),
            case.task.slug().to_string(),
            case.debias.map(|d| d.slug().to_string()),
        );
        let cell = modification.entry(key).or_default();
        cell.queried += 1;
        let verdict = crate::analyzer::detect_modification(one, case.seed.as_ref())?;
        match verdict.category {
            ModificationCategory::Invalid => cell.invalid += 1,
            ModificationCategory::ServiceDropped => cell.dropped += 1,
            ModificationCategory::SameProvider => {
                cell.n += 1;
                cell.indicators.push(0.0);
            }
            ModificationCategory::ProviderSwapped => {
                cell.n += 1;
                cell.n_m += 1;
                cell.indicators.push(1.0);
                if case.debias.is_none() {
                    let target = verdict.target_provider.expect("swap has target");
                    *swaps
                        .entry((
                            backend_id.clone(),
                            verdict.source_provider.as_str().to_string(),
                            target.as_str().to_string(),
                        ))
                        .or_insert(0) += 1;
                }
            }
        }
    }

    let mut mr_rows = Vec::new();
    for ((backend_id, task, debias), cell) in &modification {
        if cell.n == 0 {
            continue;
        }
        let tally = ModificationTally {
            n_m: cell.n_m,
            n: cell.n,
            dropped: cell.dropped,
            task: task.clone(),
            model_id: backend_id.clone(),
            scenario_id: None,
        };
        let summary = tally.ratio_bootstrap(b, rng_seed)?;
        mr_rows.push(MrRow {
            backend_id: backend_id.clone(),
            task: task.clone(),
            debias: debias.clone(),
            n_m: cell.n_m,
            n: cell.n,
            dropped: cell.dropped,
            invalid: cell.invalid,
            queried: cell.queried,
            mr_percent: tally.ratio_percent()?,
            mr: tally.ratio()?,
            mr_all_queried: cell.n_m as f64 / cell.queried as f64 * 100.0,
            ci_low: summary.ci_low,
            ci_high: summary.ci_high,
            b,
            rng_seed,
        });
    }

    // ---- debias comparison table --------------------------------------
    let mut backend_ids: Vec<String> = manifest
        .backends
        .iter()
        .map(|c| c.backend_id.clone())
        .collect();
    backend_ids.sort();
    backend_ids.dedup();
    let mut debias_rows = Vec::new();
    for backend_id in &backend_ids {
        let methods: Vec<Option<DebiasMethod>> = std::iter::once(None)
            .chain(DebiasMethod::ALL.iter().copied().map(Some))
            .collect();
        let original_indicators = pooled_indicators(&modification, backend_id, None);
        for method in methods {
            let slug = method.map(|m| m.slug().to_string());
            let indicators = pooled_indicators(&modification, backend_id, slug.as_deref());
            let gi = debias_gi(&labeled, &cases, backend_id, method, b, rng_seed)?;
            if indicators.is_empty() && gi.is_none() {
                continue;
            }
            let (mr, mr_percent) = if indicators.is_empty() {
                (None, None)
            } else {
                let n_m = indicators.iter().filter(|&&x| x == 1.0).count() as u64;
                let n = indicators.len() as u64;
                (
                    Some(n_m as f64 / n as f64 * 100.0),
                    Some(audit_stats::format_percent(n_m, n).expect("n > 0")),
                )
            };
            let (t_stat, p_value) = if method.is_some()
                && original_indicators.len() >= 2
                && indicators.len() >= 2
            {
                match welch_t(&original_indicators, &indicators) {
                    Ok((t, p)) => (Some(t), Some(p)),
                    Err(_) => (None, None),
                }
            } else {
                (None, None)
            };
            debias_rows.push(DebiasRow {
                backend_id: backend_id.clone(),
                method: method.map(|m| m.display_name().to_string()).unwrap_or_else(|| "Original".into()),
                gi,
                mr_percent,
                mr,
                t_stat,
                p_value,
            });
        }
    }

    // ---- provider-ranking comparison ----------------------------------
    let mut spearman_rows = Vec::new();
    for backend_id in &backend_ids {
        for scenario in &registry.scenarios {
            let replies = store.load(backend_id, RANK_TASK_SLUG, &scenario.id)?;
            if replies.is_empty() {
                continue;
            }
            let offered: Vec<String> = scenario
                .services
                .iter()
                .map(|s| s.provider.as_str().to_string())
                .collect();
            let mut offered_unique = offered.clone();
            offered_unique.dedup();
            let parsed: Vec<Vec<String>> = replies
                .iter()
                .filter_map(|r| parse_ranking_reply(&r.response_text, &offered_unique).ok())
                .collect();
            if parsed.is_empty() {
                continue;
            }
            let stated = crate::prompt::aggregate_rankings(&parsed);
            let Some(vector) = generation.get(&(backend_id.clone(), scenario.id.clone())) else {
                continue;
            };
            let mut by_usage: Vec<(&crate::registry::ProviderId, u64)> = vector
                .counts
                .iter()
                .filter(|(p, _)| !p.is_sentinel())
                .map(|(p, &c)| (p, c))
                .collect();
            by_usage.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.as_str().cmp(b.0.as_str())));
            let generation_ranking: Vec<String> =
                by_usage.iter().map(|(p, _)| p.as_str().to_string()).collect();
            let common: Vec<&String> = stated
                .iter()
                .filter(|p| generation_ranking.contains(p))
                .collect();
            if common.len() < 3 {
                continue;
            }
            let rank_a: Vec<f64> = common
                .iter()
                .map(|p| stated.iter().position(|x| &x == p).unwrap() as f64 + 1.0)
                .collect();
            let rank_b: Vec<f64> = common
                .iter()
                .map(|p| generation_ranking.iter().position(|x| &x == p).unwrap() as f64 + 1.0)
                .collect();
            if let Ok((rho, p)) = spearman(&rank_a, &rank_b) {
                spearman_rows.push(SpearmanRow {
                    backend_id: backend_id.clone(),
                    scenario_id: scenario.id.clone(),
                    stated_ranking: stated,
                    generation_ranking,
                    rho,
                    p_value: p,
                });
            }
        }
    }

    let invalid = invalid_counts
        .into_iter()
        .map(|((backend_id, reason), count)| InvalidRow {
            backend_id,
            reason,
            count,
        })
        .collect();

    Ok(BiasReport {
        run_id: manifest.run_id.clone(),
        registry_hash: manifest.registry_hash.clone(),
        conventions: Conventions {
            include_none_default: manifest.include_none,
            markers: manifest.markers.clone(),
            b,
            rng_seed,
            mr_denominator: "valid responses excluding ServiceDropped; mr_all_queried uses every queried case".into(),
            multiple_counting: "each block of a Multiple response is labeled and counted once".into(),
        },
        gi_rows,
        mr_rows,
        preferred,
        swaps: swaps
            .into_iter()
            .map(|((backend_id, source, target), count)| SwapRow {
                backend_id,
                source_provider: source,
                target_provider: target,
                count,
            })
            .collect(),
        debias: debias_rows,
        spearman: spearman_rows,
        invalid,
        ambiguous,
    })
}

#[derive(Default)]
struct Cell {
    n_m: u64,
    n: u64,
    dropped: u64,
    invalid: u64,
    queried: u64,
    indicators: Vec<f64>,
}

fn pooled_indicators(
    modification: &BTreeMap<(String, String, Option<String>), Cell>,
    backend_id: &str,
    debias_slug: Option<&str>,
) -> Vec<f64> {
    let mut pooled = Vec::new();
    for ((b, _, d), cell) in modification {
        if b == backend_id && d.as_deref() == debias_slug {
            pooled.extend_from_slice(&cell.indicators);
        }
    }
    pooled
}

/// GI of Generation responses carrying one debias method (or Original).
fn debias_gi(
    labeled: &[(LabeledResponse, String)],
    cases: &HashMap<&str, &PromptCase>,
    backend_id: &str,
    method: Option<DebiasMethod>,
    _b: usize,
    _rng_seed: u64,
) -> Result<Option<f64>, OrchestratorError> {
    let mut vector = ProviderCountVector::new("pooled", backend_id, true);
    for (one, b) in labeled {
        if b != backend_id || !one.verdict.valid {
            continue;
        }
        let case = cases[one.case_id.as_str()];
        if case.task != TaskKind::Generation || case.debias != method {
            continue;
        }
        vector.record(one.provider.as_ref().expect("valid implies provider"));
    }
    if vector.total() == 0 {
        return Ok(None);
    }
    Ok(Some(vector.gini()?))
}

fn write_labeled(
    run_dir: &Path,
    labeled: &[(LabeledResponse, String)],
) -> Result<(), OrchestratorError> {
    let mut out = String::new();
    for (one, _) in labeled {
        out.push_str(&serde_json::to_string(one)?);
        out.push('\n');
    }
    fs::write(run_dir.join(LABELED_FILE), out)?;
    Ok(())
}
