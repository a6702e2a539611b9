//! Scripted offline backend. Replies are a pure function of the request
//! fingerprint and attempt index, so runs and resumes are reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Backend, BackendReply, BackendRequest, GatewayError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedReply {
    pub weight: u32,
    pub reply: String,
}

/// One scripting rule. The first rule whose selectors all match decides
/// the reply: a fixed `reply`, `replies` cycled by attempt, or a seeded
/// `weighted` draw.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_id_prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempt: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replies: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted: Option<Vec<WeightedReply>>,
}

impl MockRule {
    fn matches(&self, request: &BackendRequest) -> bool {
        self.case_id
            .as_deref()
            .is_none_or(|id| id == request.case_id)
            && self
                .case_id_prefix
                .as_deref()
                .is_none_or(|p| request.case_id.starts_with(p))
            && self
                .prompt_contains
                .as_deref()
                .is_none_or(|s| request.user_prompt.contains(s))
            && self.attempt.is_none_or(|a| a == request.attempt)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_reply: Option<String>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

impl MockScript {
    pub fn load(path: &std::path::Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub struct MockBackend {
    script: MockScript,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend { script }
    }
}

impl Backend for MockBackend {
    fn complete(&self, request: &BackendRequest) -> Result<BackendReply, GatewayError> {
        for rule in &self.script.rules {
            if !rule.matches(request) {
                continue;
            }
            if let Some(reply) = &rule.reply {
                return ok(reply);
            }
            if let Some(replies) = &rule.replies {
                if !replies.is_empty() {
                    return ok(&replies[request.attempt as usize % replies.len()]);
                }
            }
            if let Some(weighted) = &rule.weighted {
                return ok(draw(weighted, self.script.rng_seed, request)?);
            }
        }
        match &self.script.default_reply {
            Some(reply) => ok(reply),
            None => Err(GatewayError::MockMiss(request.case_id.to_string())),
        }
    }
}

fn ok(text: &str) -> Result<BackendReply, GatewayError> {
    Ok(BackendReply {
        text: text.to_string(),
        token_usage: Some(text.split_whitespace().count() as u64),
    })
}

/// Seeded weighted choice keyed by (script seed, fingerprint, attempt),
/// independent of call order.
fn draw<'a>(
    weighted: &'a [WeightedReply],
    rng_seed: u64,
    request: &BackendRequest,
) -> Result<&'a str, GatewayError> {
    let total: u32 = weighted.iter().map(|w| w.weight).sum();
    if total == 0 {
        return Err(GatewayError::MockMiss(request.case_id.to_string()));
    }
    let mut hasher = Sha256::new();
    hasher.update(rng_seed.to_le_bytes());
    hasher.update(request.fingerprint.as_bytes());
    hasher.update(request.attempt.to_le_bytes());
    let digest = hasher.finalize();
    let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = rng.gen_range(0..total);
    for entry in weighted {
        if pick < entry.weight {
            return Ok(&entry.reply);
        }
        pick -= entry.weight;
    }
    unreachable!("weights cover range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request<'a>(case_id: &'a str, attempt: u32, prompt: &'a str) -> BackendRequest<'a> {
        BackendRequest {
            case_id,
            attempt,
            fingerprint: prompt, // tests key the draw off the prompt text
            system_prompt: None,
            user_prompt: prompt,
            params: Box::leak(Box::new(serde_json::Map::new())),
        }
    }

    #[test]
    fn exact_rule_wins_over_default() {
        let backend = MockBackend::new(MockScript {
            rng_seed: 0,
            default_reply: Some("default".into()),
            rules: vec![MockRule {
                case_id: Some("special".into()),
                reply: Some("scripted".into()),
                ..MockRule::default()
            }],
        });
        assert_eq!(
            backend.complete(&request("special", 0, "p")).unwrap().text,
            "scripted"
        );
        assert_eq!(
            backend.complete(&request("other", 0, "p")).unwrap().text,
            "default"
        );
    }

    #[test]
    fn unscripted_without_default_is_mock_miss() {
        let backend = MockBackend::new(MockScript::default());
        assert!(matches!(
            backend.complete(&request("x", 0, "p")),
            Err(GatewayError::MockMiss(_))
        ));
    }

    #[test]
    fn weighted_draw_is_deterministic() {
        let backend = MockBackend::new(MockScript {
            rng_seed: 5,
            default_reply: None,
            rules: vec![MockRule {
                weighted: Some(vec![
                    WeightedReply { weight: 8, reply: "google".into() },
                    WeightedReply { weight: 2, reply: "nuance".into() },
                ]),
                ..MockRule::default()
            }],
        });
        for attempt in 0..20 {
            let a = backend.complete(&request("c", attempt, "p")).unwrap().text;
            let b = backend.complete(&request("c", attempt, "p")).unwrap().text;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn weighted_frequencies_near_split() {
        // a 0.8/0.2 script over 1000 attempts must land within ±3%
        let backend = MockBackend::new(MockScript {
            rng_seed: 20260826,
            default_reply: None,
            rules: vec![MockRule {
                weighted: Some(vec![
                    WeightedReply { weight: 8, reply: "google".into() },
                    WeightedReply { weight: 2, reply: "nuance".into() },
                ]),
                ..MockRule::default()
            }],
        });
        let google = (0..1000)
            .filter(|&i| backend.complete(&request("c", i, "p")).unwrap().text == "google")
            .count();
        let share = google as f64 / 1000.0;
        assert!((share - 0.8).abs() < 0.03, "google share {share}");
    }

    #[test]
    fn attempt_scoped_rule_fires_once() {
        let backend = MockBackend::new(MockScript {
            rng_seed: 0,
            default_reply: Some("benign".into()),
            rules: vec![MockRule {
                case_id: Some("c".into()),
                attempt: Some(3),
                reply: Some("swap".into()),
                ..MockRule::default()
            }],
        });
        let swaps = (0..5)
            .filter(|&i| backend.complete(&request("c", i, "p")).unwrap().text == "swap")
            .count();
        assert_eq!(swaps, 1);
    }

    #[test]
    fn script_round_trips_through_json() {
        let script = MockScript {
            rng_seed: 1,
            default_reply: Some("d".into()),
            rules: vec![MockRule {
                prompt_contains: Some("Voice".into()),
                reply: Some("r".into()),
                ..MockRule::default()
            }],
        };
        let json = serde_json::to_string(&script).unwrap();
        assert_eq!(serde_json::from_str::<MockScript>(&json).unwrap(), script);
    }
}
