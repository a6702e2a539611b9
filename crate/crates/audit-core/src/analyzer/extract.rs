//! Code-block extraction from raw model replies.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionMethod {
    FencedBlock,
    HeuristicIndent,
    WholeBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedCode {
    /// Empty blocks signal an invalid response downstream.
    pub blocks: Vec<String>,
    pub extraction_method: ExtractionMethod,
}

const CODE_MARKER_TOKENS: [&str; 5] = ["def ", "return", "import ", "print(", "="];

/// Extract code blocks: fenced blocks preferred, then an indentation
/// heuristic, then the whole body when code-marker tokens appear anywhere.
/// Pure prose yields `WholeBody` with no blocks.
pub fn extract_code(response_text: &str) -> ExtractedCode {
    let fenced = fenced_blocks(response_text);
    if !fenced.is_empty() {
        return ExtractedCode {
            blocks: fenced,
            extraction_method: ExtractionMethod::FencedBlock,
        };
    }
    // the indent heuristic targets Markdown-style replies; bare code with
    // top-level statements must keep them, so it falls through instead
    if !has_top_level_code(response_text) {
        let indented = indented_runs(response_text);
        if !indented.is_empty() {
            return ExtractedCode {
                blocks: indented,
                extraction_method: ExtractionMethod::HeuristicIndent,
            };
        }
    }
    let has_marker = CODE_MARKER_TOKENS
        .iter()
        .any(|tok| response_text.contains(tok));
    ExtractedCode {
        blocks: if has_marker {
            vec![response_text.trim().to_string()]
        } else {
            Vec::new()
        },
        extraction_method: ExtractionMethod::WholeBody,
    }
}

fn fenced_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("```") {
            match current.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    // an unterminated fence still counts as a block
    if let Some(lines) = current {
        if !lines.is_empty() {
            blocks.push(lines.join("\n"));
        }
    }
    blocks.retain(|b| !b.trim().is_empty());
    blocks
}

/// True when some non-indented, non-empty line carries a code marker.
fn has_top_level_code(text: &str) -> bool {
    text.lines()
        .filter(|l| !l.starts_with("    ") && !l.starts_with('\t') && !l.trim().is_empty())
        .any(|l| CODE_MARKER_TOKENS.iter().any(|tok| l.contains(tok)))
}

/// Maximal runs of lines indented by four or more spaces (or a tab).
fn indented_runs(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut run: Vec<&str> = Vec::new();
    for line in text.lines() {
        let is_code = line.starts_with("    ") || line.starts_with('\t');
        if is_code || (line.trim().is_empty() && !run.is_empty()) {
            run.push(line);
        } else if !run.is_empty() {
            blocks.push(flush_run(&run));
            run.clear();
        }
    }
    if !run.is_empty() {
        blocks.push(flush_run(&run));
    }
    blocks.retain(|b| b.lines().filter(|l| !l.trim().is_empty()).count() >= 2);
    blocks
}

fn flush_run(run: &[&str]) -> String {
    let dedented: Vec<String> = run
        .iter()
        .map(|l| l.strip_prefix("    ").or_else(|| l.strip_prefix('\t')).unwrap_or(l).to_string())
        .collect();
    dedented.join("\n").trim_end().to_string()
}
