//! `audit` — drive provider-bias audits end to end.
//!
//! Exit codes: 0 complete, 2 incomplete run, 3 validation failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use audit_core::config::{AuditConfig, SeedStore};
use audit_core::gateway::{BackendConfig, Gateway, HttpBackend, MockBackend, MockScript};
use audit_core::orchestrator::{
    analyze, plan, promote_fingerprints, rank, report_json, run, selftest, write_reports,
};
use audit_core::prompt::{DebiasMethod, TaskKind};
use audit_core::registry::Registry;

const EXIT_INCOMPLETE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "audit", version, about = "Provider-bias audit harness for LLM code generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Registry JSON document.
    #[arg(long, global = true, default_value = "assets/registry.json")]
    registry: PathBuf,

    /// Audit config JSON; omit for a minimal default config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run directory holding manifest, plan, and response JSONL files.
    #[arg(long, global = true, default_value = "runs/default")]
    run_dir: PathBuf,

    /// Override the run RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Restrict to these backend ids (repeatable).
    #[arg(long = "backend", global = true)]
    backends: Vec<String>,

    /// Comma-separated task slugs (e.g. generation,debugging).
    #[arg(long, global = true, value_delimiter = ',')]
    tasks: Vec<String>,

    /// Comma-separated scenario ids.
    #[arg(long, global = true, value_delimiter = ',')]
    scenarios: Vec<String>,

    /// Comma-separated debias method slugs (e.g. cot,ask-general).
    #[arg(long, global = true, value_delimiter = ',')]
    debias: Vec<String>,

    /// Mock-backend script; replaces every configured backend transport.
    #[arg(long, global = true)]
    mock: Option<PathBuf>,

    /// Count the `None` sentinel in GI denominators (default).
    #[arg(long, global = true)]
    include_none: bool,

    /// Exclude the `None` sentinel from GI denominators.
    #[arg(long, global = true, conflicts_with = "include_none")]
    exclude_none: bool,

    /// Subject-language tag of the audited code.
    #[arg(long, global = true)]
    subject_language: Option<String>,

    /// Bootstrap replicate count.
    #[arg(long, global = true)]
    b: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the plan and print its size (writes plan.json with --run-dir).
    Plan,
    /// Execute or resume the query phase.
    Run,
    /// Recompute the bias report from persisted responses.
    Analyze,
    /// Emit report.json / report.csv / report.md.
    Report,
    /// Conversational provider-ranking audit.
    Rank,
    /// Label the bundled golden corpus and verify every expected label.
    Selftest {
        /// Golden corpus directory (snippets + expected-label sidecars).
        #[arg(long, default_value = "assets/golden")]
        corpus: PathBuf,
    },
    /// Merge quarantine-cleared learned fingerprints into a registry copy.
    PromoteFingerprints {
        /// Where to write the merged registry.
        #[arg(long, default_value = "registry.promoted.json")]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Registry(#[from] audit_core::registry::RegistryError),
    #[error(transparent)]
    Config(#[from] audit_core::config::ConfigError),
    #[error(transparent)]
    Gateway(#[from] audit_core::gateway::GatewayError),
    #[error(transparent)]
    Orchestrator(#[from] audit_core::orchestrator::OrchestratorError),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn exit_code_for(error: &CliError) -> u8 {
    use audit_core::orchestrator::OrchestratorError as OE;
    match error {
        CliError::Registry(_) | CliError::Config(_) | CliError::Validation(_) => EXIT_VALIDATION,
        CliError::Orchestrator(OE::EmptyPlan | OE::Registry(_) | OE::Config(_)) => EXIT_VALIDATION,
        _ => 1,
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, CliError> {
    let registry = Registry::load(&cli.registry)?;
    let config = effective_config(cli)?;

    match &cli.command {
        Command::Plan => {
            let seeds = load_seeds(&config)?;
            let plan = plan(&registry, &config, &seeds)?;
            std::fs::create_dir_all(&cli.run_dir)?;
            let path = cli.run_dir.join("plan.json");
            std::fs::write(&path, serde_json::to_string_pretty(&plan).map_err(|e| {
                CliError::Validation(e.to_string())
            })?)?;
            println!("{} cases planned -> {}", plan.cases.len(), path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run => {
            let seeds = load_seeds(&config)?;
            let plan = plan(&registry, &config, &seeds)?;
            let gateways = build_gateways(cli, &config)?;
            let outcome = run(&plan, &registry, &config, &gateways, &cli.run_dir)?;
            println!(
                "run {}: queried {}, skipped {}",
                if outcome.complete { "complete" } else { "incomplete" },
                outcome.queried,
                outcome.skipped
            );
            Ok(if outcome.complete {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INCOMPLETE)
            })
        }
        Command::Analyze => {
            let report = analyze(&cli.run_dir, &registry)?;
            let json = report_json(&report)?;
            let path = cli.run_dir.join("analysis.json");
            std::fs::write(&path, &json)?;
            println!(
                "analysis written to {} ({} GI rows, {} MR rows)",
                path.display(),
                report.gi_rows.len(),
                report.mr_rows.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report => {
            let report = analyze(&cli.run_dir, &registry)?;
            let paths = write_reports(&report, &cli.run_dir.join("reports"))?;
            for path in paths {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rank => {
            let gateways = build_gateways(cli, &config)?;
            let outcome = rank(&registry, &config, &gateways, &cli.run_dir)?;
            println!(
                "rank {}: queried {}, skipped {}",
                if outcome.complete { "complete" } else { "incomplete" },
                outcome.queried,
                outcome.skipped
            );
            Ok(if outcome.complete {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INCOMPLETE)
            })
        }
        Command::Selftest { corpus } => {
            let outcome = selftest(&registry, corpus)?;
            for failure in &outcome.failures {
                eprintln!("FAIL {failure}");
            }
            println!(
                "selftest: {}/{} snippets labeled as expected",
                outcome.total - outcome.failures.len(),
                outcome.total
            );
            Ok(if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }
        Command::PromoteFingerprints { output } => {
            let mut merged = registry.clone();
            let added = promote_fingerprints(&mut merged, &cli.run_dir)?;
            std::fs::write(output, merged.to_json())?;
            println!("promoted {added} learned entries -> {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn effective_config(cli: &Cli) -> Result<AuditConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => AuditConfig::load(path)?,
        None => serde_json::from_str(r#"{"backends": []}"#).expect("default config"),
    };
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    if !cli.tasks.is_empty() {
        config.tasks = cli
            .tasks
            .iter()
            .map(|slug| {
                TaskKind::from_slug(slug)
                    .ok_or_else(|| CliError::Validation(format!("unknown task slug `{slug}`")))
            })
            .collect::<Result<_, _>>()?;
    }
    if !cli.scenarios.is_empty() {
        config.scenarios = cli.scenarios.clone();
    }
    if !cli.debias.is_empty() {
        config.debias = cli
            .debias
            .iter()
            .map(|slug| {
                DebiasMethod::from_slug(slug).ok_or_else(|| {
                    CliError::Validation(format!("unknown debias method `{slug}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
    }
    if cli.exclude_none {
        config.include_none = false;
    } else if cli.include_none {
        config.include_none = true;
    }
    if let Some(language) = &cli.subject_language {
        config.subject_language = language.clone();
    }
    if let Some(b) = cli.b {
        config.bootstrap_b = b;
    }
    if !cli.backends.is_empty() {
        config.backends.retain(|b| cli.backends.contains(&b.backend_id));
        if config.backends.is_empty() {
            return Err(CliError::Validation(
                "no configured backend matches --backend".into(),
            ));
        }
    }
    if config.backends.is_empty() && cli.mock.is_some() {
        // a mock script without explicit backends gets a default harness
        config.backends.push(BackendConfig {
            backend_id: "mock".into(),
            endpoint: None,
            model: None,
            auth_env: None,
            params: serde_json::Map::new(),
            max_concurrency: 4,
            max_retries: 0,
            budget: 1_000_000,
        });
    }
    Ok(config)
}

fn load_seeds(config: &AuditConfig) -> Result<SeedStore, CliError> {
    match &config.seed_dir {
        Some(dir) => Ok(SeedStore::load(dir)?),
        None => Ok(SeedStore::default()),
    }
}

fn build_gateways(cli: &Cli, config: &AuditConfig) -> Result<Vec<Gateway>, CliError> {
    if config.backends.is_empty() {
        return Err(CliError::Validation(
            "no backends configured; pass --config or --mock".into(),
        ));
    }
    let mut gateways = Vec::new();
    for backend in &config.backends {
        let transport: Box<dyn audit_core::gateway::Backend> = match &cli.mock {
            Some(script_path) => {
                Box::new(MockBackend::new(MockScript::load(script_path)?))
            }
            None => {
                let endpoint = backend.endpoint.as_deref().ok_or_else(|| {
                    CliError::Validation(format!(
                        "backend `{}` has no endpoint and no --mock was given",
                        backend.backend_id
                    ))
                })?;
                let model = backend.model.as_deref().ok_or_else(|| {
                    CliError::Validation(format!("backend `{}` has no model", backend.backend_id))
                })?;
                Box::new(HttpBackend::new(endpoint, model, backend.auth_env.as_deref()))
            }
        };
        gateways.push(Gateway::new(backend.clone(), transport)?);
    }
    Ok(gateways)
}

