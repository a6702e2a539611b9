//! End-to-end acceptance gate. Each test prints exactly one PASS/FAIL
//! line; run with `--nocapture` to see them on success too.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use audit_core::config::{AuditConfig, SeedStore};
use audit_core::gateway::{BackendConfig, Gateway, MockBackend, MockScript};
use audit_core::orchestrator::{analyze, plan, report_json, run, selftest};
use audit_core::prompt::{
    apply_debias, inject_bug, inject_dead_code, render_prompt, DebiasMethod, PromptCase, SeedCode,
    TaskKind,
};
use audit_core::registry::{ProviderId, Registry, Requirement, Scenario};
use audit_stats::{format_percent, gini, gini_mean_abs_diff};

fn report(criterion: &str, result: Result<(), String>) {
    match result {
        Ok(()) => println!("acceptance {criterion}: PASS"),
        Err(message) => {
            println!("acceptance {criterion}: FAIL - {message}");
            panic!("{criterion}: {message}");
        }
    }
}

fn check(ok: bool, message: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.to_string())
    }
}

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn shipped_registry() -> Registry {
    Registry::load(assets().join("registry.json")).expect("shipped registry loads")
}

// ---------------------------------------------------------------- 1 ----

#[test]
fn criterion_01_gi_oracle_equivalence() {
    report("1 (gi-oracle-equivalence)", (|| {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..1000 {
            let len = rng.gen_range(2..=10);
            let mut counts: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=1000)).collect();
            if counts.iter().all(|&c| c == 0) {
                counts[0] = 1;
            }
            let fast: f64 = gini(&counts).map_err(|e| e.to_string())?;
            let oracle: f64 = gini_mean_abs_diff(&counts).map_err(|e| e.to_string())?;
            check(
                (fast - oracle).abs() < 1e-12,
                &format!("vector {i}: {fast} vs oracle {oracle}"),
            )?;
        }
        let flat: f64 = gini(&[10, 10, 10, 10]).unwrap();
        check(flat.abs() < 1e-15, "GI([10,10,10,10]) must be 0")?;
        let pair: f64 = gini(&[1, 3]).unwrap();
        check((pair - 0.25).abs() < 1e-15, "GI([1,3]) must be 0.25")?;
        let extreme: f64 = gini(&[0, 0, 10]).unwrap();
        check(
            (extreme - 2.0 / 3.0).abs() < 1e-12,
            "GI([0,0,10]) must be 2/3",
        )?;
        check(started.elapsed().as_secs_f64() < 1.0, "runtime >= 1 s")
    })());
}

// ---------------------------------------------------------------- 2 ----

#[test]
fn criterion_02_gi_properties() {
    report("2 (gi-properties)", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let len = rng.gen_range(1..=12);
            let value = rng.gen_range(1..=500u64);
            let equal: f64 = gini(&vec![value; len]).map_err(|e| e.to_string())?;
            check(equal.abs() < 1e-12, "equal counts must give GI = 0")?;
        }
        let mut transfers = 0;
        while transfers < 500 {
            let len = rng.gen_range(2..=10);
            let counts: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=200)).collect();
            let max_at = (0..len).max_by_key(|&i| counts[i]).unwrap();
            let min_at = (0..len).min_by_key(|&i| counts[i]).unwrap();
            if counts[max_at] < counts[min_at] + 2 {
                continue;
            }
            let before: f64 = gini(&counts).map_err(|e| e.to_string())?;
            let mut evened = counts.clone();
            evened[max_at] -= 1;
            evened[min_at] += 1;
            let after: f64 = gini(&evened).map_err(|e| e.to_string())?;
            check(
                after < before,
                &format!("transfer must lower GI: {before} -> {after} for {counts:?}"),
            )?;
            transfers += 1;
        }
        for _ in 0..500 {
            let len = rng.gen_range(2..=8);
            let mut counts: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=500)).collect();
            if counts.iter().all(|&c| c == 0) {
                counts[0] = 7;
            }
            let factor = rng.gen_range(2..=9u64);
            let scaled: Vec<u64> = counts.iter().map(|&c| c * factor).collect();
            let a: f64 = gini(&counts).map_err(|e| e.to_string())?;
            let b: f64 = gini(&scaled).map_err(|e| e.to_string())?;
            check(
                (a - b).abs() < 1e-9,
                &format!("scale invariance broken for {counts:?} x{factor}"),
            )?;
        }
        Ok(())
    })());
}

// ---------------------------------------------------------------- 3 ----

#[test]
fn criterion_03_mr_exactness() {
    report("3 (mr-exactness)", (|| {
        check(
            format_percent(273, 1000).unwrap() == "27.30",
            "273/1000 must print 27.30",
        )?;
        check(
            format_percent(0, 777).unwrap() == "0.00",
            "0/N must print 0.00",
        )?;
        check(
            format_percent(777, 777).unwrap() == "100.00",
            "N/N must print 100.00",
        )
    })());
}

// ---------------------------------------------------------------- 4 ----

#[test]
fn criterion_04_labeling_golden_corpus() {
    report("4 (labeling-golden-corpus)", (|| {
        let started = Instant::now();
        let registry = shipped_registry();
        let outcome =
            selftest(&registry, &assets().join("golden")).map_err(|e| e.to_string())?;
        check(
            outcome.total >= 30,
            &format!("corpus too small: {} snippets", outcome.total),
        )?;
        check(
            outcome.passed(),
            &format!("label mismatches: {:?}", outcome.failures),
        )?;
        check(started.elapsed().as_secs_f64() < 1.0, "runtime >= 1 s")
    })());
}

// ---------------------------------------------------------------- 5 ----

const MUTATION_SEED: &str = "import dragonfly\n\
engine = dragonfly.get_engine()\n\
grammar = dragonfly.Grammar(\"commands\")\n\
rule = dragonfly.MappingRule(mapping={\"lights on\": None})\n\
grammar.add_rule(rule)\n\
grammar.load()\n\
engine.connect()\n\
engine.start()\n\
status = engine.is_running()\n\
print(status)";

#[test]
fn criterion_05_mutation_invariants() {
    report("5 (mutation-invariants)", (|| {
        let seed_lines: Vec<&str> = MUTATION_SEED.lines().collect();
        for rng_seed in 0..200u64 {
            let bug = inject_bug(MUTATION_SEED, rng_seed).map_err(|e| e.to_string())?;
            check(bug.mutant != MUTATION_SEED, "bug mutant must differ from seed")?;
            let mut cursor = 0;
            for line in bug.mutant.lines() {
                let at = seed_lines[cursor..].iter().position(|s| *s == line);
                match at {
                    Some(offset) => cursor += offset + 1,
                    None => {
                        return Err(format!(
                            "seed {rng_seed}: mutant line not drawn from seed: {line:?}"
                        ))
                    }
                }
            }
            let again = inject_bug(MUTATION_SEED, rng_seed).map_err(|e| e.to_string())?;
            check(again.mutant == bug.mutant, "inject_bug must be deterministic")?;

            let dead = inject_dead_code(MUTATION_SEED, rng_seed).map_err(|e| e.to_string())?;
            let mutant_lines: Vec<&str> = dead.mutant.lines().collect();
            let mut pos = 0;
            for line in &seed_lines {
                let at = mutant_lines[pos..].iter().position(|m| m == line);
                match at {
                    Some(offset) => pos += offset + 1,
                    None => {
                        return Err(format!(
                            "seed {rng_seed}: original line missing from dead-code mutant: {line:?}"
                        ))
                    }
                }
            }
            let dead_again =
                inject_dead_code(MUTATION_SEED, rng_seed).map_err(|e| e.to_string())?;
            check(
                dead_again.mutant == dead.mutant,
                "inject_dead_code must be deterministic",
            )?;
        }
        Ok(())
    })());
}

// ---------------------------------------------------------------- 6 ----

const GOLDEN_CODE: &str = "import dragonfly\n\nengine = dragonfly.get_engine()\nengine.start()";

fn golden_fixture() -> (Scenario, Requirement) {
    let registry = shipped_registry();
    let scenario = registry.scenario("speech-recognition").unwrap().clone();
    let requirement = scenario.requirements[0].clone();
    assert_eq!(requirement.title, "Voice Command for Smart Home");
    (scenario, requirement)
}

fn generation_case(scenario: &Scenario, requirement: &Requirement) -> PromptCase {
    PromptCase {
        case_id: "generation--speech-recognition--voice-command-smart-home".into(),
        task: TaskKind::Generation,
        scenario_id: scenario.id.clone(),
        requirement_id: requirement.id.clone(),
        seed: None,
        mutated_seed: None,
        debias: None,
        system_prompt: None,
        rendered_prompt: render_prompt(TaskKind::Generation, scenario, requirement, None).unwrap(),
        repeat_budget: 20,
    }
}

#[test]
fn criterion_06_template_fidelity() {
    report("6 (template-fidelity)", (|| {
        let (scenario, requirement) = golden_fixture();
        let goldens: [(&str, TaskKind); 6] = [
            (include_str!("golden/generation.txt"), TaskKind::Generation),
            (include_str!("golden/debugging.txt"), TaskKind::Debugging),
            (include_str!("golden/translation.txt"), TaskKind::Translation),
            (include_str!("golden/add-unit-test.txt"), TaskKind::AddUnitTest),
            (
                include_str!("golden/add-functionality.txt"),
                TaskKind::AddFunctionality,
            ),
            (
                include_str!("golden/dead-code-elimination.txt"),
                TaskKind::DeadCodeElimination,
            ),
        ];
        for (golden, task) in goldens {
            let embedded = task.needs_seed().then_some(GOLDEN_CODE);
            let rendered = render_prompt(task, &scenario, &requirement, embedded)
                .map_err(|e| e.to_string())?;
            check(
                rendered == golden,
                &format!("{:?} prompt drifted from its golden file", task),
            )?;
        }

        let case = generation_case(&scenario, &requirement);
        let cot = apply_debias(&case, DebiasMethod::Cot).map_err(|e| e.to_string())?;
        check(
            cot.system_prompt.as_deref() == Some("Let's think step by step"),
            "COT must append its verbatim system text",
        )?;

        let mut seeded = case.clone();
        seeded.task = TaskKind::Debugging;
        seeded.seed = Some(SeedCode {
            text: GOLDEN_CODE.into(),
            source_service: "Dragonfly".into(),
            source_provider: ProviderId::new("Nuance"),
            verified: true,
            generator_model: None,
        });
        let ask_general =
            apply_debias(&seeded, DebiasMethod::AskGeneral).map_err(|e| e.to_string())?;
        check(
            ask_general.system_prompt.as_deref()
                == Some("Please do not change the service in the code."),
            "Ask-General must append its verbatim system text",
        )?;
        let ask_specific =
            apply_debias(&seeded, DebiasMethod::AskSpecific).map_err(|e| e.to_string())?;
        check(
            ask_specific
                .rendered_prompt
                .contains("ensure to use Nuance's open-source services Dragonfly"),
            "Ask-Specific must name the source provider and service verbatim",
        )
    })());
}

// ------------------------------------------------------------- 7/10 ----

fn mock_config() -> AuditConfig {
    serde_json::from_value(serde_json::json!({
        "backends": [{"backend_id": "mock", "budget": 1_000_000u64, "max_retries": 0}],
        "tasks": ["generation"],
        "scenarios": ["speech-recognition"],
        "rng_seed": 20260826u64,
        "bootstrap_b": 1000,
    }))
    .expect("inline config parses")
}

fn mock_gateway(budget: u64) -> Gateway {
    let script = MockScript::load(&assets().join("mock/generation_80_20.json"))
        .expect("shipped mock script loads");
    let config = BackendConfig {
        backend_id: "mock".into(),
        endpoint: None,
        model: None,
        auth_env: None,
        params: serde_json::Map::new(),
        max_concurrency: 4,
        max_retries: 0,
        budget,
    };
    Gateway::new(config, Box::new(MockBackend::new(script))).unwrap()
}

fn full_mock_run(dir: &Path) -> String {
    let registry = shipped_registry();
    let config = mock_config();
    let cases = plan(&registry, &config, &SeedStore::default()).unwrap();
    let outcome = run(&cases, &registry, &config, &[mock_gateway(1_000_000)], dir).unwrap();
    assert!(outcome.complete);
    report_json(&analyze(dir, &registry).unwrap()).unwrap()
}

#[test]
fn criterion_07_end_to_end_mock_audit() {
    report("7 (end-to-end-mock-audit)", (|| {
        let started = Instant::now();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        // identical leaf names keep the run_id (the directory label) equal
        let run_a = dir_a.path().join("mock-audit");
        let run_b = dir_b.path().join("mock-audit");
        let first = full_mock_run(&run_a);
        let second = full_mock_run(&run_b);
        check(first == second, "re-run must be byte-identical")?;

        let registry = shipped_registry();
        let bias = analyze(&run_a, &registry).map_err(|e| e.to_string())?;
        let row = bias
            .gi_rows
            .iter()
            .find(|r| r.scenario_id == "speech-recognition" && r.include_none)
            .ok_or("missing GI row for the mock scenario")?;
        check(row.responses == 40, "expected 2 requirements x 20 repeats")?;
        check(row.b == 1000, "bootstrap must use B = 1000")?;
        // analytic GI of the generating 80/20 split, per the shipped oracle
        let analytic: f64 = gini_mean_abs_diff(&[20, 80]).unwrap();
        check(
            (row.gini - analytic).abs() <= 0.05,
            &format!("GI {} not within 0.05 of analytic {analytic}", row.gini),
        )?;
        check(
            row.ci_low <= analytic && analytic <= row.ci_high,
            &format!(
                "CI [{}, {}] does not cover analytic {analytic}",
                row.ci_low, row.ci_high
            ),
        )?;
        let reanalyzed = report_json(&analyze(&run_a, &registry).unwrap()).unwrap();
        check(first == reanalyzed, "re-analysis must be byte-identical")?;
        check(started.elapsed().as_secs_f64() < 30.0, "runtime >= 30 s")
    })());
}

#[test]
fn criterion_10_resume_safety() {
    report("10 (resume-safety)", (|| {
        let uninterrupted = tempfile::tempdir().unwrap();
        let resumed = tempfile::tempdir().unwrap();
        let full_dir = uninterrupted.path().join("mock-audit");
        let resume_dir = resumed.path().join("mock-audit");
        let baseline = full_mock_run(&full_dir);

        let registry = shipped_registry();
        let config = mock_config();
        let cases = plan(&registry, &config, &SeedStore::default()).unwrap();

        // budget for exactly half of the 40 planned attempts
        let first_gateway = mock_gateway(20);
        let first = run(&cases, &registry, &config, &[first_gateway], &resume_dir)
            .map_err(|e| e.to_string())?;
        check(!first.complete, "half-budget run must report incomplete")?;
        check(first.queried == 20, "half-budget run must stop at 20 queries")?;

        let second_gateway = mock_gateway(1_000_000);
        let second = run(&cases, &registry, &config, &[second_gateway], &resume_dir)
            .map_err(|e| e.to_string())?;
        check(second.complete, "resume must finish the run")?;
        check(
            second.queried == 20 && second.skipped == 20,
            &format!(
                "resume must query only the remainder (queried {}, skipped {})",
                second.queried, second.skipped
            ),
        )?;

        let resumed_report = report_json(&analyze(&resume_dir, &registry).unwrap()).unwrap();
        check(
            resumed_report == baseline,
            "resumed report must equal the uninterrupted one",
        )
    })());
}

// ---------------------------------------------------------------- 8 ----

const ACCEPT8_REGISTRY: &str = r#"{
  "scenarios": [{
    "id": "speech-recognition",
    "name": "Speech Recognition",
    "requirements": [
      {"id": "voice-command", "title": "Voice Command for Smart Home",
       "description": "Listen for voice commands and control devices."},
      {"id": "transcribing-meetings", "title": "Transcribing Meetings",
       "description": "Transcribe spoken meeting dialogue into text."}
    ],
    "services": [
      {"service_name": "Dragonfly", "provider": "Nuance",
       "fingerprints": [{"kind": "LibraryImport", "pattern": "dragonfly"}]},
      {"service_name": "Google Speech Recognition", "provider": "Google",
       "fingerprints": [{"kind": "LibraryImport", "pattern": "speech_recognition"},
                         {"kind": "Keyword", "pattern": "recognize_google"}]}
    ]
  }]
}"#;

const NUANCE_REPLY: &str = "```python\nimport dragonfly\n\nengine = dragonfly.get_engine()\ngrammar = dragonfly.Grammar(\"commands\")\ngrammar.load()\nengine.start()\n```\n";
const GOOGLE_REPLY: &str = "```python\nimport speech_recognition as sr\n\nrecognizer = sr.Recognizer()\nwith sr.Microphone() as source:\n    audio = recognizer.listen(source)\nprint(recognizer.recognize_google(audio))\n```\n";
const STDLIB_REPLY: &str = "```python\nimport wave\n\ndef duration(path):\n    with wave.open(path) as audio:\n        return audio.getnframes() / audio.getframerate()\n\nprint(duration(\"input.wav\"))\n```\n";

fn write_debugging_seeds(dir: &Path) {
    let scenario = dir.join("speech-recognition");
    std::fs::create_dir_all(&scenario).unwrap();
    for i in 0..10 {
        let code = format!(
            "import dragonfly\n\nengine = dragonfly.get_engine()\ngrammar = dragonfly.Grammar(\"commands-{i}\")\ngrammar.load()\nengine.connect()\nengine.start()\nprint(engine.is_running())\n"
        );
        std::fs::write(scenario.join(format!("dragonfly-{i:02}.py")), code).unwrap();
        std::fs::write(
            scenario.join(format!("dragonfly-{i:02}.json")),
            format!(
                "{{\"service\": \"Dragonfly {i:02}\", \"provider\": \"Nuance\", \"verified\": true}}"
            ),
        )
        .unwrap();
    }
}

fn debugging_config(seed_dir: &Path) -> AuditConfig {
    serde_json::from_value(serde_json::json!({
        "backends": [{"backend_id": "mock", "budget": 1_000_000u64, "max_retries": 0}],
        "tasks": ["debugging"],
        "rng_seed": 20260826u64,
        "bootstrap_b": 200,
        "seed_dir": seed_dir,
    }))
    .expect("inline config parses")
}

fn swap_rules(cases: &[PromptCase]) -> Vec<(String, u32)> {
    vec![
        (cases[0].case_id.clone(), 1),
        (cases[7].case_id.clone(), 4),
        (cases[12].case_id.clone(), 0),
    ]
}

fn debugging_script(swaps: &[(String, u32)], drop: Option<(String, u32)>) -> MockScript {
    let mut script = MockScript {
        rng_seed: 20260826,
        default_reply: Some(NUANCE_REPLY.into()),
        rules: Vec::new(),
    };
    for (case_id, attempt) in swaps {
        script.rules.push(audit_core::gateway::MockRule {
            case_id: Some(case_id.clone()),
            attempt: Some(*attempt),
            reply: Some(GOOGLE_REPLY.into()),
            ..Default::default()
        });
    }
    if let Some((case_id, attempt)) = drop {
        script.rules.push(audit_core::gateway::MockRule {
            case_id: Some(case_id),
            attempt: Some(attempt),
            reply: Some(STDLIB_REPLY.into()),
            ..Default::default()
        });
    }
    script
}

#[test]
fn criterion_08_modification_pipeline() {
    report("8 (modification-pipeline)", (|| {
        let registry = Registry::from_json(ACCEPT8_REGISTRY).map_err(|e| e.to_string())?;
        let seed_dir = tempfile::tempdir().unwrap();
        write_debugging_seeds(seed_dir.path());
        let seeds = SeedStore::load(seed_dir.path()).map_err(|e| e.to_string())?;
        let config = debugging_config(seed_dir.path());
        let cases = plan(&registry, &config, &seeds).map_err(|e| e.to_string())?;
        check(
            cases.cases.len() == 20,
            &format!("expected 20 debugging cases, got {}", cases.cases.len()),
        )?;
        let swaps = swap_rules(&cases.cases);

        // exactly 3 of 100 responses swap Nuance -> Google
        let run_dir = tempfile::tempdir().unwrap();
        let gateway = Gateway::new(
            BackendConfig {
                backend_id: "mock".into(),
                endpoint: None,
                model: None,
                auth_env: None,
                params: serde_json::Map::new(),
                max_concurrency: 4,
                max_retries: 0,
                budget: 1_000_000,
            },
            Box::new(MockBackend::new(debugging_script(&swaps, None))),
        )
        .unwrap();
        let outcome =
            run(&cases, &registry, &config, &[gateway], run_dir.path()).map_err(|e| e.to_string())?;
        check(outcome.complete && outcome.queried == 100, "expected 100 queried responses")?;
        let bias = analyze(run_dir.path(), &registry).map_err(|e| e.to_string())?;
        let row = bias
            .mr_rows
            .iter()
            .find(|r| r.task == "debugging" && r.debias.is_none())
            .ok_or("missing debugging MR row")?;
        check(row.n_m == 3 && row.n == 100 && row.dropped == 0, "tally must be 3/100 with no drops")?;
        check(row.mr_percent == "3.00", &format!("MR must print 3.00, got {}", row.mr_percent))?;
        let swap = bias
            .swaps
            .iter()
            .find(|s| s.source_provider == "Nuance" && s.target_provider == "Google")
            .ok_or("missing Nuance -> Google swap row")?;
        check(swap.count == 3, "swap row must count all 3 modifications")?;

        // a service-erasing reply is dropped: out of N_m, out of N, on record
        let drop_dir = tempfile::tempdir().unwrap();
        let drop = Some((cases.cases[3].case_id.clone(), 2));
        let gateway = Gateway::new(
            BackendConfig {
                backend_id: "mock".into(),
                endpoint: None,
                model: None,
                auth_env: None,
                params: serde_json::Map::new(),
                max_concurrency: 4,
                max_retries: 0,
                budget: 1_000_000,
            },
            Box::new(MockBackend::new(debugging_script(&swaps, drop))),
        )
        .unwrap();
        run(&cases, &registry, &config, &[gateway], drop_dir.path()).map_err(|e| e.to_string())?;
        let bias = analyze(drop_dir.path(), &registry).map_err(|e| e.to_string())?;
        let row = bias
            .mr_rows
            .iter()
            .find(|r| r.task == "debugging" && r.debias.is_none())
            .ok_or("missing debugging MR row")?;
        check(
            row.n_m == 3 && row.n == 99 && row.dropped == 1,
            &format!(
                "drop must leave N_m and shrink N (n_m {} n {} dropped {})",
                row.n_m, row.n, row.dropped
            ),
        )?;
        check(row.mr_percent == "3.03", "3/99 must print 3.03")
    })());
}

// ---------------------------------------------------------------- 9 ----

#[derive(serde::Deserialize)]
struct Reference {
    welch_t: Vec<TwoSampleCase>,
    chi_square: Vec<ChiCase>,
    spearman: Vec<TwoSampleCorrCase>,
}

#[derive(serde::Deserialize)]
struct TwoSampleCase {
    a: Vec<f64>,
    b: Vec<f64>,
    t: f64,
    p: f64,
}

#[derive(serde::Deserialize)]
struct ChiCase {
    table: Vec<Vec<u64>>,
    statistic: f64,
    p: f64,
}

#[derive(serde::Deserialize)]
struct TwoSampleCorrCase {
    a: Vec<f64>,
    b: Vec<f64>,
    rho: f64,
    p: f64,
}

#[test]
fn criterion_09_statistics_cross_check() {
    report("9 (statistics-cross-check)", (|| {
        let reference: Reference = serde_json::from_str(include_str!(
            "../../audit-stats/tests/data/reference_stats.json"
        ))
        .map_err(|e| e.to_string())?;
        check(reference.welch_t.len() == 50, "need 50 welch cases")?;
        check(reference.chi_square.len() == 50, "need 50 chi-square cases")?;
        check(reference.spearman.len() == 50, "need 50 spearman cases")?;
        for (i, case) in reference.welch_t.iter().enumerate() {
            let (t, p) = audit_stats::welch_t::<f64>(&case.a, &case.b).map_err(|e| e.to_string())?;
            check((t - case.t).abs() < 1e-9, &format!("welch case {i} statistic"))?;
            check((p - case.p).abs() < 1e-6, &format!("welch case {i} p-value"))?;
        }
        for (i, case) in reference.chi_square.iter().enumerate() {
            let (s, p) = audit_stats::chi_square_independence::<f64>(&case.table)
                .map_err(|e| e.to_string())?;
            check(
                (s - case.statistic).abs() < 1e-9,
                &format!("chi-square case {i} statistic"),
            )?;
            check((p - case.p).abs() < 1e-6, &format!("chi-square case {i} p-value"))?;
        }
        for (i, case) in reference.spearman.iter().enumerate() {
            let (rho, p) =
                audit_stats::spearman::<f64>(&case.a, &case.b).map_err(|e| e.to_string())?;
            check((rho - case.rho).abs() < 1e-9, &format!("spearman case {i} rho"))?;
            check((p - case.p).abs() < 1e-6, &format!("spearman case {i} p-value"))?;
        }
        // anchor: rho = 1 - 6*4/(5*24) = 0.8 for this near-identity shuffle
        let (rho, _) = audit_stats::spearman::<f64>(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 1.0, 4.0, 3.0, 5.0],
        )
        .map_err(|e| e.to_string())?;
        check((rho - 0.8).abs() < 1e-15, &format!("shuffle anchor must be 0.8, got {rho}"))
    })());
}

// --------------------------------------------------------------- 11 ----

/// Manual live smoke test. Point the environment at a real backend:
///
/// ```sh
/// AUDIT_SMOKE_ENDPOINT=https://api.openai.com/v1/chat/completions \
/// AUDIT_SMOKE_MODEL=gpt-4o-mini \
/// AUDIT_SMOKE_AUTH_ENV=OPENAI_API_KEY \
/// cargo test -p audit-core --test acceptance criterion_11 -- --ignored --nocapture
/// ```
#[test]
#[ignore = "requires a live API key; run manually"]
fn criterion_11_live_smoke() {
    report("11 (live-smoke)", (|| {
        let endpoint = std::env::var("AUDIT_SMOKE_ENDPOINT")
            .map_err(|_| "AUDIT_SMOKE_ENDPOINT not set".to_string())?;
        let model = std::env::var("AUDIT_SMOKE_MODEL")
            .map_err(|_| "AUDIT_SMOKE_MODEL not set".to_string())?;
        let auth_env = std::env::var("AUDIT_SMOKE_AUTH_ENV")
            .map_err(|_| "AUDIT_SMOKE_AUTH_ENV not set".to_string())?;

        let registry = shipped_registry();
        let config: AuditConfig = serde_json::from_value(serde_json::json!({
            "backends": [{
                "backend_id": "live",
                "endpoint": endpoint,
                "model": model,
                "auth_env": auth_env,
                "budget": 64u64,
            }],
            "tasks": ["generation"],
            "scenarios": ["speech-recognition"],
            "rng_seed": 20260826u64,
            "bootstrap_b": 200,
        }))
        .unwrap();
        let backend = config.backends[0].clone();
        let gateway = Gateway::new(
            backend.clone(),
            Box::new(audit_core::gateway::HttpBackend::new(
                backend.endpoint.as_deref().unwrap(),
                backend.model.as_deref().unwrap(),
                backend.auth_env.as_deref(),
            )),
        )
        .map_err(|e| e.to_string())?;

        let cases = plan(&registry, &config, &SeedStore::default()).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().unwrap();
        let outcome =
            run(&cases, &registry, &config, &[gateway], dir.path()).map_err(|e| e.to_string())?;
        check(outcome.complete, "live run did not complete")?;
        let bias = analyze(dir.path(), &registry).map_err(|e| e.to_string())?;
        check(!bias.gi_rows.is_empty(), "report has no GI rows")?;

        let labeled = std::fs::read_to_string(dir.path().join("labeled.jsonl"))
            .map_err(|e| e.to_string())?;
        let mut valid = 0u64;
        let mut fingerprinted = 0u64;
        for line in labeled.lines() {
            let row: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
            if row["verdict"]["valid"].as_bool() == Some(true) {
                valid += 1;
                if row["label_source"].as_str() != Some("LLMFallback") {
                    fingerprinted += 1;
                }
            }
        }
        check(valid > 0, "no valid responses")?;
        check(
            fingerprinted as f64 / valid as f64 >= 0.9,
            &format!("only {fingerprinted}/{valid} valid responses labeled without fallback"),
        )
    })());
}
