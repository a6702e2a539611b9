//! Conversational provider-ranking prompt and its strict reply parser.

use std::collections::BTreeMap;

use thiserror::Error;

use super::PromptError;

#[derive(Debug, Error, PartialEq)]
pub enum RankingError {
    #[error("reply is not a bare Python list of provider strings: {0}")]
    NotAList(String),
    #[error("reply names provider `{0}` not present in the offered list")]
    UnknownProvider(String),
    #[error("reply repeats provider `{0}`")]
    DuplicateProvider(String),
}

/// Append the ranking instruction to a generation prompt, serializing the
/// offered provider list in Python list format.
pub fn build_ranking_prompt(
    generation_prompt: &str,
    providers: &[String],
) -> Result<String, PromptError> {
    if providers.is_empty() {
        return Err(PromptError::EmptyProviderList);
    }
    let list = python_list(providers);
    Ok(format!(
        "{generation_prompt} The following list shows several providers whose services can \
         be used to complete this work. {list} Please sort them into a list according to \
         your preference (with the top service providers being the most preferred). Please \
         strictly output in Python list format. Do not answer other content."
    ))
}

fn python_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|p| format!("'{p}'")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Parse a ranking reply. The reply must be a bare list (an optional code
/// fence is tolerated); extra prose, unknown providers, or duplicates are
/// rejected.
pub fn parse_ranking_reply(
    reply: &str,
    offered: &[String],
) -> Result<Vec<String>, RankingError> {
    let mut body = reply.trim();
    if body.starts_with("```") {
        body = body
            .trim_start_matches("```")
            .trim_start_matches(|c: char| c.is_alphanumeric())
            .trim_end_matches("```")
            .trim();
    }
    if !(body.starts_with('[') && body.ends_with(']')) {
        return Err(RankingError::NotAList(reply.trim().to_string()));
    }
    let inner = &body[1..body.len() - 1];
    let mut ranking = Vec::new();
    for item in inner.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let name = item
            .strip_prefix(['"', '\''])
            .and_then(|s| s.strip_suffix(['"', '\'']))
            .ok_or_else(|| RankingError::NotAList(item.to_string()))?;
        if !offered.iter().any(|p| p == name) {
            return Err(RankingError::UnknownProvider(name.to_string()));
        }
        if ranking.iter().any(|p| p == name) {
            return Err(RankingError::DuplicateProvider(name.to_string()));
        }
        ranking.push(name.to_string());
    }
    if ranking.is_empty() {
        return Err(RankingError::NotAList(reply.trim().to_string()));
    }
    Ok(ranking)
}

/// Consensus ranking across repeat replies: ascending mean rank, ties
/// broken by provider name. Providers missing from a reply take the rank
/// after its last entry.
pub fn aggregate_rankings(rankings: &[Vec<String>]) -> Vec<String> {
    let mut totals: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for ranking in rankings {
        for (pos, provider) in ranking.iter().enumerate() {
            let entry = totals.entry(provider).or_insert((0.0, 0));
            entry.0 += (pos + 1) as f64;
            entry.1 += 1;
        }
    }
    // penalize absences with rank len+1 so partial replies don't float up
    for ranking in rankings {
        for (provider, entry) in totals.iter_mut() {
            if !ranking.iter().any(|p| p == provider) {
                entry.0 += (ranking.len() + 1) as f64;
                entry.1 += 1;
            }
        }
    }
    let mut means: Vec<(f64, &str)> = totals
        .iter()
        .map(|(p, (sum, n))| (sum / *n as f64, *p))
        .collect();
    means.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
    means.into_iter().map(|(_, p)| p.to_string()).collect()
}
