//! Conversational provider-ranking audit (`audit rank`). One ranking
//! prompt per scenario, 20 repeats, persisted under the `rank` task slug
//! so `analyze` can compare stated preference against generation usage.

use std::fs;
use std::path::Path;

use crate::config::AuditConfig;
use crate::gateway::{Gateway, GatewayError, RunStore};
use crate::prompt::{build_ranking_prompt, render_prompt, PromptCase, TaskKind};
use crate::registry::Registry;

use super::run::{ensure_manifest, PLAN_FILE};
use super::{OrchestratorError, Plan, RunOutcome};

pub const RANK_TASK_SLUG: &str = "rank";
const RANK_REPEATS: u32 = 20;

pub fn rank(
    registry: &Registry,
    config: &AuditConfig,
    gateways: &[Gateway],
    run_dir: &Path,
) -> Result<RunOutcome, OrchestratorError> {
    fs::create_dir_all(run_dir)?;
    let store = RunStore::open(run_dir)?;
    ensure_manifest(run_dir, registry, config, false)?;
    // a standalone ranking run still needs a (possibly empty) plan so
    // analyze can consume the directory
    let plan_path = run_dir.join(PLAN_FILE);
    if !plan_path.exists() {
        let empty = Plan {
            cases: Vec::new(),
            subset_random_fallback: false,
        };
        fs::write(&plan_path, serde_json::to_string_pretty(&empty)?)?;
    }

    let mut cases = Vec::new();
    for scenario in &registry.scenarios {
        if !config.scenarios.is_empty() && !config.scenarios.contains(&scenario.id) {
            continue;
        }
        let requirement = scenario
            .requirements
            .first()
            .ok_or_else(|| OrchestratorError::MissingRunData(scenario.id.clone()))?;
        let mut providers: Vec<String> = scenario
            .services
            .iter()
            .map(|s| s.provider.as_str().to_string())
            .collect();
        providers.dedup();
        let generation = render_prompt(TaskKind::Generation, scenario, requirement, None)?;
        let rendered = build_ranking_prompt(&generation, &providers)?;
        cases.push(PromptCase {
            case_id: format!("rank--{}", scenario.id),
            task: TaskKind::Generation,
            scenario_id: scenario.id.clone(),
            requirement_id: requirement.id.clone(),
            seed: None,
            mutated_seed: None,
            debias: None,
            system_prompt: None,
            rendered_prompt: rendered,
            repeat_budget: RANK_REPEATS,
        });
    }
    if cases.is_empty() {
        return Err(OrchestratorError::EmptyPlan);
    }

    let completed = store.completed_attempts()?;
    let mut queried = 0u64;
    let mut skipped = 0u64;
    let mut complete = true;
    for gateway in gateways {
        let backend_id = gateway.config().backend_id.clone();
        'cases: for case in &cases {
            let done = completed.get(&case.case_id).copied().unwrap_or(0);
            skipped += done.min(case.repeat_budget) as u64;
            for attempt in done..case.repeat_budget {
                match gateway.query_attempt(case, attempt) {
                    Ok(response) => {
                        store.append(&backend_id, RANK_TASK_SLUG, &case.scenario_id, &response)?;
                        queried += 1;
                    }
                    Err(GatewayError::BudgetExhausted(_)) => {
                        complete = false;
                        break 'cases;
                    }
                    Err(other) => return Err(other.into()),
                }
            }
        }
    }

    Ok(RunOutcome {
        complete,
        queried,
        skipped,
    })
}
