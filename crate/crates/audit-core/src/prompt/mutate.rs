//! Seeded, deterministic mutations over seed snippets: bug injection
//! (line deletion) and dead-code insertion.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PromptError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationResult {
    pub mutant: String,
    pub log: MutationLog,
    pub rng_seed: u64,
}

/// Audit record: exactly which lines were removed or inserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationLog {
    /// Removed (original line index, line text) pairs, ascending.
    Deleted(Vec<(usize, String)>),
    /// Inserted (original boundary index, block text) pairs, ascending.
    Inserted(Vec<(usize, String)>),
}

/// Remove 1..=k statement lines, k = min(3, ceil(lines / 5)). Deletions
/// are weighted toward lines that define an identifier used later, so the
/// mutant is likely a genuine bug. Deterministic per (seed, rng_seed).
pub fn inject_bug(seed: &str, rng_seed: u64) -> Result<MutationResult, PromptError> {
    let lines: Vec<&str> = seed.lines().collect();
    let statement_idx: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| is_statement(l))
        .map(|(i, _)| i)
        .collect();
    if statement_idx.len() < 3 {
        return Err(PromptError::SeedTooSmall(statement_idx.len()));
    }
    let k = (statement_idx.len().div_ceil(5)).min(3).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let deletions = rng.gen_range(1..=k);

    // cheap def-use scan: deleting a definition whose name recurs later
    // makes a more convincing bug
    let weights: Vec<u32> = statement_idx
        .iter()
        .map(|&i| {
            match defined_identifier(lines[i]) {
                Some(name) if lines[i + 1..].iter().any(|l| mentions(l, &name)) => 4,
                _ => 1,
            }
        })
        .collect();

    let mut candidates: Vec<(usize, u32)> =
        statement_idx.iter().copied().zip(weights).collect();
    let mut removed = Vec::new();
    for _ in 0..deletions {
        let total: u32 = candidates.iter().map(|(_, w)| w).sum();
        let mut pick = rng.gen_range(0..total);
        let pos = candidates
            .iter()
            .position(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .expect("weights cover range");
        let (line_idx, _) = candidates.remove(pos);
        removed.push(line_idx);
    }
    removed.sort_unstable();

    let mutant: String = lines
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, l)| *l)
        .collect::<Vec<_>>()
        .join("\n");
    let log = MutationLog::Deleted(
        removed
            .iter()
            .map(|&i| (i, lines[i].to_string()))
            .collect(),
    );
    Ok(MutationResult {
        mutant,
        log,
        rng_seed,
    })
}

/// Insert 1..=2 dead-code blocks at random line boundaries. Blocks come
/// from a fixed template set with gensym'd identifiers, so they never
/// reference anything the seed defines. Original lines survive in order.
pub fn inject_dead_code(seed: &str, rng_seed: u64) -> Result<MutationResult, PromptError> {
    let lines: Vec<&str> = seed.lines().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let insertions = rng.gen_range(1..=2usize);

    // boundaries before a line whose indentation we can adopt
    let mut boundaries: Vec<usize> = (0..lines.len())
        .filter(|&i| is_statement(lines[i]))
        .collect();
    if boundaries.is_empty() {
        boundaries.push(0);
    }

    let mut picks: Vec<usize> = Vec::new();
    for _ in 0..insertions {
        picks.push(*boundaries.choose(&mut rng).expect("non-empty"));
    }
    picks.sort_unstable();

    let mut blocks: Vec<(usize, String)> = Vec::new();
    for &at in &picks {
        let indent: String = lines
            .get(at)
            .map(|l| l.chars().take_while(|c| c.is_whitespace()).collect())
            .unwrap_or_default();
        let sym = format!("_dc_{:08x}", rng.gen::<u32>());
        let template = rng.gen_range(0..3u8);
        let block = match template {
            0 => format!(
                "{indent}for {sym}_i in range(10):\n{indent}    for {sym}_j in range(100):\n{indent}        pass"
            ),
            1 => format!("{indent}if False:\n{indent}    {sym} = 0"),
            _ => format!("{indent}{sym} = None"),
        };
        blocks.push((at, block));
    }

    let mut out: Vec<String> = Vec::new();
    let mut block_iter = blocks.iter().peekable();
    for (i, line) in lines.iter().enumerate() {
        while block_iter.peek().is_some_and(|(at, _)| *at == i) {
            out.push(block_iter.next().unwrap().1.clone());
        }
        out.push(line.to_string());
    }
    for (_, block) in block_iter {
        out.push(block.clone());
    }

    Ok(MutationResult {
        mutant: out.join("\n"),
        log: MutationLog::Inserted(blocks),
        rng_seed,
    })
}

fn is_statement(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && !t.starts_with('#')
}

/// Identifier defined by a simple assignment, def, or class line.
fn defined_identifier(line: &str) -> Option<String> {
    let t = line.trim();
    for prefix in ["def ", "class "] {
        if let Some(rest) = t.strip_prefix(prefix) {
            let name: String = rest
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            return (!name.is_empty()).then_some(name);
        }
    }
    let (lhs, _) = t.split_once('=')?;
    let lhs = lhs.trim().trim_end_matches(|c| c == '+' || c == '-' || c == '*' || c == '/');
    let lhs = lhs.trim();
    if !lhs.is_empty() && lhs.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '.') {
        Some(lhs.split('.').next().unwrap().to_string())
    } else {
        None
    }
}

fn mentions(line: &str, name: &str) -> bool {
    line.split(|c: char| !c.is_alphanumeric() && c != '_')
        .any(|tok| tok == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const SEED: &str = "import dragonfly\n\
                        engine = dragonfly.get_engine()\n\
                        grammars = dragonfly.Grammar('lights')\n\
                        grammars.load()\n\
                        engine.start()";

    #[test]
    fn bug_injection_deletes_lines_only() {
        let result = inject_bug(SEED, 1).unwrap();
        assert_ne!(result.mutant, SEED);
        let seed_lines: Vec<&str> = SEED.lines().collect();
        for line in result.mutant.lines() {
            assert!(seed_lines.contains(&line));
        }
        match &result.log {
            MutationLog::Deleted(removed) => assert!(!removed.is_empty() && removed.len() <= 3),
            _ => panic!("expected deletion log"),
        }
    }

    #[test]
    fn two_line_seed_too_small() {
        let err = inject_bug("a = 1\nb = 2", 0).unwrap_err();
        assert_eq!(err, PromptError::SeedTooSmall(2));
    }

    #[test]
    fn bug_injection_is_deterministic() {
        assert_eq!(inject_bug(SEED, 42).unwrap(), inject_bug(SEED, 42).unwrap());
    }

    #[test]
    fn motivating_shape_is_reachable() {
        // some seed removes exactly the definition lines a later use needs
        let mut saw_def_deletion = false;
        for seed in 0..50 {
            let result = inject_bug(SEED, seed).unwrap();
            if let MutationLog::Deleted(removed) = &result.log {
                if removed.iter().any(|(_, l)| l.contains("grammars =")) {
                    saw_def_deletion = true;
                    break;
                }
            }
        }
        assert!(saw_def_deletion, "definition lines never targeted in 50 seeds");
    }

    #[test]
    fn dead_code_preserves_order() {
        let result = inject_dead_code(SEED, 3).unwrap();
        let mutant_lines: Vec<&str> = result.mutant.lines().collect();
        let mut cursor = 0;
        for seed_line in SEED.lines() {
            let found = mutant_lines[cursor..]
                .iter()
                .position(|l| *l == seed_line)
                .expect("seed line present in order");
            cursor += found + 1;
        }
    }

    #[test]
    fn dead_code_references_no_seed_identifier() {
        let result = inject_dead_code(SEED, 9).unwrap();
        if let MutationLog::Inserted(blocks) = &result.log {
            for (_, block) in blocks {
                for name in ["engine", "grammars", "dragonfly"] {
                    assert!(!mentions(block, name), "block references seed name {name}");
                }
            }
        }
    }

    #[test]
    fn dead_code_insertion_sites_vary_across_seeds() {
        let mut sites = HashSet::new();
        for seed in 0..100 {
            if let MutationLog::Inserted(blocks) = inject_dead_code(SEED, seed).unwrap().log {
                for (at, _) in blocks {
                    sites.insert(at);
                }
            }
        }
        assert!(sites.len() > 1, "all 100 draws used one insertion site");
    }

    #[test]
    fn dead_code_is_deterministic() {
        assert_eq!(
            inject_dead_code(SEED, 7).unwrap(),
            inject_dead_code(SEED, 7).unwrap()
        );
    }
}
