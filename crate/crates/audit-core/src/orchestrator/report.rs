//! Report emission: machine tables (CSV + JSON) and a Markdown summary.
//! All three formats encode the same `BiasReport` values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{BiasReport, OrchestratorError};

pub fn report_json(report: &BiasReport) -> Result<String, OrchestratorError> {
    let mut out = serde_json::to_string_pretty(report)?;
    out.push('\n');
    Ok(out)
}

/// One CSV file with `#`-prefixed section markers; every section keeps its
/// own header so the file splits cleanly.
pub fn report_csv(report: &BiasReport) -> String {
    let mut out = String::new();
    out.push_str("# gi\n");
    out.push_str("backend_id,scenario_id,include_none,n,responses,gini,ci_low,ci_high,b,rng_seed\n");
    for row in &report.gi_rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            row.backend_id,
            row.scenario_id,
            row.include_none,
            row.n,
            row.responses,
            row.gini,
            row.ci_low,
            row.ci_high,
            row.b,
            row.rng_seed
        );
    }
    out.push_str("# mr\n");
    out.push_str(
        "backend_id,task,debias,n_m,n,dropped,invalid,queried,mr_percent,mr,mr_all_queried,ci_low,ci_high,b,rng_seed\n",
    );
    for row in &report.mr_rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.backend_id,
            row.task,
            row.debias.as_deref().unwrap_or(""),
            row.n_m,
            row.n,
            row.dropped,
            row.invalid,
            row.queried,
            row.mr_percent,
            row.mr,
            row.mr_all_queried,
            row.ci_low,
            row.ci_high,
            row.b,
            row.rng_seed
        );
    }
    out.push_str("# preferred\n");
    out.push_str("backend_id,scenario_id,providers,share\n");
    for row in &report.preferred {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.backend_id,
            row.scenario_id,
            row.providers.join("|"),
            row.share
        );
    }
    out.push_str("# swaps\n");
    out.push_str("backend_id,source_provider,target_provider,count\n");
    for row in &report.swaps {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.backend_id, row.source_provider, row.target_provider, row.count
        );
    }
    out.push_str("# debias\n");
    out.push_str("backend_id,method,gi,mr_percent,mr,t_stat,p_value\n");
    for row in &report.debias {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.backend_id,
            row.method,
            opt_num(row.gi),
            row.mr_percent.as_deref().unwrap_or(""),
            opt_num(row.mr),
            opt_num(row.t_stat),
            opt_num(row.p_value)
        );
    }
    out.push_str("# spearman\n");
    out.push_str("backend_id,scenario_id,rho,p_value,stated_ranking,generation_ranking\n");
    for row in &report.spearman {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.backend_id,
            row.scenario_id,
            row.rho,
            row.p_value,
            row.stated_ranking.join("|"),
            row.generation_ranking.join("|")
        );
    }
    out.push_str("# invalid\n");
    out.push_str("backend_id,reason,count\n");
    for row in &report.invalid {
        let _ = writeln!(out, "{},{},{}", row.backend_id, row.reason, row.count);
    }
    out.push_str("# ambiguous\n");
    out.push_str("case_id,attempt,providers\n");
    for row in &report.ambiguous {
        let _ = writeln!(out, "{},{},{}", row.case_id, row.attempt, row.providers.join("|"));
    }
    out
}

fn opt_num(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn report_markdown(report: &BiasReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Bias audit report — run `{}`\n", report.run_id);
    let _ = writeln!(out, "Registry hash: `{}`\n", report.registry_hash);
    let c = &report.conventions;
    let _ = writeln!(
        out,
        "Conventions: B={}, rng_seed={}, markers={:?}, include_none default={}. MR denominator: {}. Multiple counting: {}.\n",
        c.b, c.rng_seed, c.markers, c.include_none_default, c.mr_denominator, c.multiple_counting
    );

    if !report.gi_rows.is_empty() {
        out.push_str("## Gini Index per (model, scenario)\n\n");
        out.push_str("GI ranges over [0, (n-1)/n]; n is printed next to every value.\n\n");
        out.push_str("| Model | Scenario | include_none | n | Responses | GI | 95% CI |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for row in &report.gi_rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {:.4} | [{:.4}, {:.4}] |",
                row.backend_id,
                row.scenario_id,
                row.include_none,
                row.n,
                row.responses,
                row.gini,
                row.ci_low,
                row.ci_high
            );
        }
        out.push('\n');
    }

    if !report.mr_rows.is_empty() {
        out.push_str("## Modification Ratio per (model, task)\n\n");
        out.push_str("| Model | Task | Debias | N_m | N | Dropped | MR | MR (all queried) | 95% CI |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for row in &report.mr_rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {}% | {:.2}% | [{:.2}, {:.2}] |",
                row.backend_id,
                row.task,
                row.debias.as_deref().unwrap_or("Original"),
                row.n_m,
                row.n,
                row.dropped,
                row.mr_percent,
                row.mr_all_queried,
                row.ci_low,
                row.ci_high
            );
        }
        out.push('\n');
    }

    if !report.preferred.is_empty() {
        out.push_str("## Preferred providers (generation)\n\n");
        out.push_str("| Model | Scenario | Provider(s) | Share |\n|---|---|---|---|\n");
        for row in &report.preferred {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.2}% |",
                row.backend_id,
                row.scenario_id,
                row.providers.join(", "),
                row.share * 100.0
            );
        }
        out.push('\n');
    }

    if !report.swaps.is_empty() {
        out.push_str("## Provider swaps (source → target)\n\n");
        out.push_str("| Model | Source | Target | Count |\n|---|---|---|---|\n");
        for row in &report.swaps {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                row.backend_id, row.source_provider, row.target_provider, row.count
            );
        }
        out.push('\n');
    }

    if !report.debias.is_empty() {
        out.push_str("## Debias method comparison\n\n");
        out.push_str("| Model | Method | GI | MR | t | p |\n|---|---|---|---|---|---|\n");
        for row in &report.debias {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                row.backend_id,
                row.method,
                row.gi.map(|v| format!("{v:.4}")).unwrap_or_else(|| "—".into()),
                row.mr_percent
                    .as_ref()
                    .map(|v| format!("{v}%"))
                    .unwrap_or_else(|| "—".into()),
                row.t_stat.map(|v| format!("{v:.3}")).unwrap_or_else(|| "—".into()),
                row.p_value.map(|v| format!("{v:.4}")).unwrap_or_else(|| "—".into()),
            );
        }
        out.push('\n');
    }

    if !report.spearman.is_empty() {
        out.push_str("## Stated ranking vs generation usage\n\n");
        out.push_str("| Model | Scenario | rho | p | Stated | Generated |\n|---|---|---|---|---|---|\n");
        for row in &report.spearman {
            let _ = writeln!(
                out,
                "| {} | {} | {:.3} | {:.4} | {} | {} |",
                row.backend_id,
                row.scenario_id,
                row.rho,
                row.p_value,
                row.stated_ranking.join(" > "),
                row.generation_ranking.join(" > ")
            );
        }
        out.push('\n');
    }

    if !report.invalid.is_empty() {
        out.push_str("## Invalid responses\n\n");
        out.push_str("| Model | Reason | Count |\n|---|---|---|\n");
        for row in &report.invalid {
            let _ = writeln!(out, "| {} | {} | {} |", row.backend_id, row.reason, row.count);
        }
        out.push('\n');
    }

    if !report.ambiguous.is_empty() {
        out.push_str("## Ambiguous labels (excluded from tallies)\n\n");
        out.push_str("| Case | Attempt | Providers |\n|---|---|---|\n");
        for row in &report.ambiguous {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                row.case_id,
                row.attempt,
                row.providers.join(", ")
            );
        }
        out.push('\n');
    }

    out
}

/// Write report.json / report.csv / report.md into `dir`.
pub fn write_reports(report: &BiasReport, dir: &Path) -> Result<Vec<PathBuf>, OrchestratorError> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    let csv = dir.join("report.csv");
    let md = dir.join("report.md");
    std::fs::write(&json, report_json(report)?)?;
    std::fs::write(&csv, report_csv(report))?;
    std::fs::write(&md, report_markdown(report))?;
    Ok(vec![json, csv, md])
}
