//! Query phase: manifest-first, lock-guarded, resumable.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::AuditConfig;
use crate::gateway::{Gateway, GatewayError, RunStore};
use crate::registry::{Fingerprint, FingerprintKind, Registry, ServiceEntry};

use super::{OrchestratorError, Plan};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PLAN_FILE: &str = "plan.json";
pub const STATUS_FILE: &str = "status.json";
pub const LOCK_FILE: &str = ".lock";
pub const LEARNED_FILE: &str = "learned_fingerprints.jsonl";

/// Written before the first query and immutable afterwards. Completion
/// state lives in the separate status file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub registry_hash: String,
    /// Secrets never appear here; configs carry env-var names only.
    pub backends: Vec<crate::gateway::BackendConfig>,
    pub tasks: Vec<String>,
    pub scenarios: Vec<String>,
    pub debias: Vec<String>,
    pub rng_seed: u64,
    pub subject_language: String,
    pub markers: Vec<String>,
    pub include_none: bool,
    pub bootstrap_b: usize,
    pub subset_random_fallback: bool,
    pub started: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub complete: bool,
    pub queried: u64,
    pub skipped: u64,
    pub finished: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub complete: bool,
    /// Requests actually sent this invocation.
    pub queried: u64,
    /// Attempts skipped because they were already persisted.
    pub skipped: u64,
}

struct LockGuard(std::path::PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn acquire_lock(run_dir: &Path) -> Result<LockGuard, OrchestratorError> {
    let path = run_dir.join(LOCK_FILE);
    match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
        Ok(_) => Ok(LockGuard(path)),
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
            Err(OrchestratorError::LockHeld(path))
        }
        Err(e) => Err(e.into()),
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write the run manifest on first contact with a run directory; existing
/// manifests are never touched.
pub(super) fn ensure_manifest(
    run_dir: &Path,
    registry: &Registry,
    config: &AuditConfig,
    subset_random_fallback: bool,
) -> Result<(), OrchestratorError> {
    let manifest_path = run_dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        return Ok(());
    }
    let manifest = RunManifest {
        run_id: run_dir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("run")
            .to_string(),
        registry_hash: registry.content_hash(),
        backends: config.backends.clone(),
        tasks: config
            .effective_tasks()
            .iter()
            .map(|t| t.slug().to_string())
            .collect(),
        scenarios: config.scenarios.clone(),
        debias: config.debias.iter().map(|d| d.slug().to_string()).collect(),
        rng_seed: config.rng_seed,
        subject_language: config.subject_language.clone(),
        markers: config.markers.clone(),
        include_none: config.include_none,
        bootstrap_b: config.bootstrap_b,
        subset_random_fallback,
        started: now(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

/// Execute (or resume) a run. The manifest and plan are persisted before
/// the first query; re-invocation skips attempts that are already on disk.
pub fn run(
    plan: &Plan,
    registry: &Registry,
    config: &AuditConfig,
    gateways: &[Gateway],
    run_dir: &Path,
) -> Result<RunOutcome, OrchestratorError> {
    fs::create_dir_all(run_dir)?;
    let _lock = acquire_lock(run_dir)?;
    let store = RunStore::open(run_dir)?;

    // the persisted plan wins on resume so queries stay consistent
    let plan_path = run_dir.join(PLAN_FILE);
    let plan: Plan = if plan_path.exists() {
        serde_json::from_str(&fs::read_to_string(&plan_path)?)?
    } else {
        fs::write(&plan_path, serde_json::to_string_pretty(plan)?)?;
        plan.clone()
    };

    ensure_manifest(run_dir, registry, config, plan.subset_random_fallback)?;

    let completed: HashMap<String, u32> = store.completed_attempts()?;
    let mut queried = 0u64;
    let mut skipped = 0u64;
    let mut complete = true;

    for gateway in gateways {
        let backend_id = gateway.config().backend_id.clone();
        let mut exhausted = false;
        for case in &plan.cases {
            let done = completed.get(&case.case_id).copied().unwrap_or(0);
            skipped += done.min(case.repeat_budget) as u64;
            if done >= case.repeat_budget {
                continue;
            }
            if exhausted {
                complete = false;
                continue;
            }
            for attempt in done..case.repeat_budget {
                match gateway.query_attempt(case, attempt) {
                    Ok(response) => {
                        store.append(
                            &backend_id,
                            case.task.slug(),
                            &case.scenario_id,
                            &response,
                        )?;
                        queried += 1;
                    }
                    Err(GatewayError::BudgetExhausted(_)) => {
                        exhausted = true;
                        complete = false;
                        break;
                    }
                    Err(other) => return Err(other.into()),
                }
            }
        }
    }

    let status = RunStatus {
        complete,
        queried,
        skipped,
        finished: complete.then(now),
    };
    fs::write(
        run_dir.join(STATUS_FILE),
        serde_json::to_string_pretty(&status)?,
    )?;

    Ok(RunOutcome {
        complete,
        queried,
        skipped,
    })
}

/// Merge quarantine-cleared learned fingerprints into a registry copy.
/// Returns the number of service entries added.
pub fn promote_fingerprints(
    registry: &mut Registry,
    run_dir: &Path,
) -> Result<usize, OrchestratorError> {
    let path = run_dir.join(LEARNED_FILE);
    if !path.exists() {
        return Ok(0);
    }
    let text = fs::read_to_string(&path)?;
    let mut added = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let learned: crate::analyzer::LearnedFingerprint = serde_json::from_str(line)?;
        if learned.quarantined {
            continue;
        }
        let Some(scenario) = registry
            .scenarios
            .iter_mut()
            .find(|s| s.id == learned.scenario_id)
        else {
            continue;
        };
        let service_name = learned
            .service_name
            .clone()
            .unwrap_or_else(|| format!("{} service", learned.provider.as_str()));
        if scenario
            .services
            .iter()
            .any(|s| s.provider == learned.provider && s.service_name == service_name)
        {
            continue;
        }
        let mut fingerprints: Vec<Fingerprint> = learned
            .imports
            .iter()
            .map(|m| Fingerprint {
                kind: FingerprintKind::LibraryImport,
                pattern: m.clone(),
            })
            .collect();
        fingerprints.extend(learned.urls.iter().map(|u| Fingerprint {
            kind: FingerprintKind::UrlTemplate,
            pattern: u.clone(),
        }));
        if fingerprints.is_empty() {
            continue;
        }
        scenario.services.push(ServiceEntry {
            service_name,
            provider: learned.provider.clone(),
            fingerprints,
            subject_language_support: Default::default(),
        });
        added += 1;
    }
    registry.validate()?;
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SeedStore;
    use crate::gateway::{MockBackend, MockScript};
    use crate::prompt::TaskKind;
    use crate::registry::Registry;

    fn registry() -> Registry {
        Registry::from_json(
            r#"{
              "scenarios": [{
                "id": "speech-recognition",
                "name": "Speech Recognition",
                "requirements": [
                  {"id": "voice-command", "title": "Voice Command for Smart Home",
                   "description": "Listen for voice commands."}
                ],
                "services": [
                  {"service_name": "Dragonfly", "provider": "Nuance",
                   "fingerprints": [{"kind": "LibraryImport", "pattern": "dragonfly"}]}
                ]
              }]
            }"#,
        )
        .unwrap()
    }

    fn config(budget: u64) -> AuditConfig {
        let mut config: AuditConfig = serde_json::from_str(r#"{"backends": []}"#).unwrap();
        config.tasks = vec![TaskKind::Generation];
        config.backends = vec![crate::gateway::BackendConfig {
            backend_id: "mock".into(),
            endpoint: None,
            model: None,
            auth_env: None,
            params: serde_json::Map::new(),
            max_concurrency: 1,
            max_retries: 0,
            budget,
        }];
        config
    }

    fn gateway(budget: u64) -> Gateway {
        let script = MockScript {
            rng_seed: 0,
            default_reply: Some("```python\nimport dragonfly\n```".into()),
            rules: vec![],
        };
        Gateway::new(
            config(budget).backends[0].clone(),
            Box::new(MockBackend::new(script)),
        )
        .unwrap()
    }

    fn make_plan(cfg: &AuditConfig) -> Plan {
        super::super::plan(&registry(), cfg, &SeedStore::default()).unwrap()
    }

    #[test]
    fn full_mock_run_persists_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(100);
        let outcome = run(&make_plan(&cfg), &registry(), &cfg, &[gateway(100)], dir.path()).unwrap();
        assert!(outcome.complete);
        assert_eq!(outcome.queried, 20);
        assert!(dir.path().join(MANIFEST_FILE).is_file());
        assert!(dir.path().join(PLAN_FILE).is_file());
        assert!(dir
            .path()
            .join("mock/generation/speech-recognition.jsonl")
            .is_file());
        assert!(!dir.path().join(LOCK_FILE).exists(), "lock released");
    }

    #[test]
    fn zero_budget_run_is_incomplete_with_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(0);
        let outcome = run(&make_plan(&cfg), &registry(), &cfg, &[gateway(0)], dir.path()).unwrap();
        assert!(!outcome.complete);
        assert_eq!(outcome.queried, 0);
        assert!(dir.path().join(MANIFEST_FILE).is_file());
    }

    #[test]
    fn resume_completes_exactly_the_remainder() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(100);
        let plan = make_plan(&cfg);
        // first pass: budget for half the 20 attempts
        let first = run(&plan, &registry(), &cfg, &[gateway(10)], dir.path()).unwrap();
        assert!(!first.complete);
        assert_eq!(first.queried, 10);
        // resume with fresh budget: only the missing 10 are queried
        let second = run(&plan, &registry(), &cfg, &[gateway(100)], dir.path()).unwrap();
        assert!(second.complete);
        assert_eq!(second.queried, 10);
        assert_eq!(second.skipped, 10);
        let store = RunStore::open(dir.path()).unwrap();
        assert_eq!(store.load_all().unwrap().len(), 20);
    }

    #[test]
    fn second_process_is_locked_out() {
        let dir = tempfile::tempdir().unwrap();
        let _held = acquire_lock(dir.path()).unwrap();
        let cfg = config(10);
        assert!(matches!(
            run(&make_plan(&cfg), &registry(), &cfg, &[gateway(10)], dir.path()),
            Err(OrchestratorError::LockHeld(_))
        ));
    }

    #[test]
    fn manifest_is_written_once() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(100);
        let plan = make_plan(&cfg);
        run(&plan, &registry(), &cfg, &[gateway(5)], dir.path()).unwrap();
        let before = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        run(&plan, &registry(), &cfg, &[gateway(100)], dir.path()).unwrap();
        let after = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn promote_adds_only_cleared_entries() {
        let dir = tempfile::tempdir().unwrap();
        let learned = [
            r#"{"scenario_id":"speech-recognition","provider":"AssemblyAI","service_name":"AssemblyAI API","imports":["assemblyai"],"urls":[],"quarantined":false}"#,
            r#"{"scenario_id":"speech-recognition","provider":"Rev","service_name":null,"imports":["rev_ai"],"urls":[],"quarantined":true}"#,
        ]
        .join("\n");
        fs::write(dir.path().join(LEARNED_FILE), learned).unwrap();
        let mut reg = registry();
        let added = promote_fingerprints(&mut reg, dir.path()).unwrap();
        assert_eq!(added, 1);
        let services = &reg.scenarios[0].services;
        assert!(services.iter().any(|s| s.provider.as_str() == "AssemblyAI"));
        assert!(!services.iter().any(|s| s.provider.as_str() == "Rev"));
    }
}
