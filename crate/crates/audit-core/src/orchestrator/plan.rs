//! Deterministic Cartesian expansion of the audit plan.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{AuditConfig, SeedStore};
use crate::prompt::{
    apply_debias, inject_bug, inject_dead_code, render_prompt, MutationResult, PromptCase,
    PromptError, TaskKind,
};
use crate::registry::Registry;

use super::OrchestratorError;

/// Cases selected per task in debias-subset mode (the small
/// evaluation slice): 20 Generation prompts plus up to 40 per seedful task.
const SUBSET_GENERATION: usize = 20;
const SUBSET_PER_SEEDFUL_TASK: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub cases: Vec<PromptCase>,
    /// True when subset sampling had no prior-run verdicts to stratify on
    /// and fell back to plain random selection.
    pub subset_random_fallback: bool,
}

pub fn plan(
    registry: &Registry,
    config: &AuditConfig,
    seeds: &SeedStore,
) -> Result<Plan, OrchestratorError> {
    let mut originals = Vec::new();
    for scenario in &registry.scenarios {
        if !config.scenarios.is_empty() && !config.scenarios.contains(&scenario.id) {
            continue;
        }
        for task in config.effective_tasks() {
            for requirement in &scenario.requirements {
                if task == TaskKind::Generation {
                    let case_id =
                        format!("{}--{}--{}", task.slug(), scenario.id, requirement.id);
                    let rendered = render_prompt(task, scenario, requirement, None)?;
                    originals.push(PromptCase {
                        case_id,
                        task,
                        scenario_id: scenario.id.clone(),
                        requirement_id: requirement.id.clone(),
                        seed: None,
                        mutated_seed: None,
                        debias: None,
                        system_prompt: None,
                        rendered_prompt: rendered,
                        repeat_budget: task.default_repeat_budget(),
                    });
                    continue;
                }
                for seed in seeds.seeds_for(&scenario.id) {
                    let case_id = format!(
                        "{}--{}--{}--{}",
                        task.slug(),
                        scenario.id,
                        requirement.id,
                        slug(&seed.source_service)
                    );
                    let mutated = match task {
                        TaskKind::Debugging => {
                            match inject_bug(&seed.text, case_rng_seed(config.rng_seed, &case_id))
                            {
                                Ok(MutationResult { mutant, .. }) => Some(mutant),
                                Err(PromptError::SeedTooSmall(lines)) => {
                                    log::warn!(
                                        "skipping {case_id}: seed has only {lines} statement lines"
                                    );
                                    continue;
                                }
                                Err(other) => return Err(other.into()),
                            }
                        }
                        TaskKind::DeadCodeElimination => Some(
                            inject_dead_code(
                                &seed.text,
                                case_rng_seed(config.rng_seed, &case_id),
                            )?
                            .mutant,
                        ),
                        _ => None,
                    };
                    let embedded = mutated.as_deref().unwrap_or(&seed.text);
                    let rendered = render_prompt(task, scenario, requirement, Some(embedded))?;
                    originals.push(PromptCase {
                        case_id,
                        task,
                        scenario_id: scenario.id.clone(),
                        requirement_id: requirement.id.clone(),
                        seed: Some(seed.clone()),
                        mutated_seed: mutated,
                        debias: None,
                        system_prompt: None,
                        rendered_prompt: rendered,
                        repeat_budget: task.default_repeat_budget(),
                    });
                }
            }
        }
    }

    let mut subset_random_fallback = false;
    if config.debias_subset {
        originals = sample_subset(originals, config.rng_seed);
        // no prior-run verdict store is wired in yet, so stratified
        // benign/modification selection degrades to random sampling
        subset_random_fallback = true;
    }

    let mut cases = Vec::new();
    for original in originals {
        for method in &config.debias {
            if method.applies_to(original.task) {
                let mut variant = apply_debias(&original, *method)?;
                variant.case_id = format!("{}--{}", original.case_id, method.slug());
                cases.push(variant);
            }
        }
        cases.push(original);
    }
    // originals first, then variants, in registry order
    cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    if cases.is_empty() {
        return Err(OrchestratorError::EmptyPlan);
    }
    Ok(Plan {
        cases,
        subset_random_fallback,
    })
}

/// Seeded random subset: 20 Generation cases plus up to 40 per seedful task.
fn sample_subset(originals: Vec<PromptCase>, rng_seed: u64) -> Vec<PromptCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut kept = Vec::new();
    for task in TaskKind::ALL {
        let mut pool: Vec<PromptCase> = originals
            .iter()
            .filter(|c| c.task == task)
            .cloned()
            .collect();
        let quota = if task == TaskKind::Generation {
            SUBSET_GENERATION
        } else {
            SUBSET_PER_SEEDFUL_TASK
        };
        if pool.len() > quota {
            pool.shuffle(&mut rng);
            pool.truncate(quota);
            pool.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        }
        kept.extend(pool);
    }
    kept
}

/// Per-case mutation seed derived from the run seed and the case id.
fn case_rng_seed(run_seed: u64, case_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(run_seed.to_le_bytes());
    hasher.update(case_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}
