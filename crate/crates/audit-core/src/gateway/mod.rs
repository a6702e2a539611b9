//! Uniform access to chat-completion backends: budgets, caching, retries,
//! bounded concurrency, and a deterministic mock for offline runs.

mod http;
mod mock;
mod persist;

pub use http::HttpBackend;
pub use mock::{MockBackend, MockRule, MockScript, WeightedReply};
pub use persist::RunStore;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompt::PromptCase;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("request budget exhausted (budget {0})")]
    BudgetExhausted(u64),
    #[error("transport failure after {attempts} attempts: {message}")]
    TransportError { attempts: u32, message: String },
    #[error("auth environment variable `{0}` is not set")]
    AuthMissing(String),
    #[error("mock script has no rule for case `{0}`")]
    MockMiss(String),
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed persisted record: {0}")]
    Persist(#[from] serde_json::Error),
}

/// Committable backend description. Secrets stay in the environment; the
/// config carries only the variable name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub backend_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    /// Pass-through request parameters (temperature and friends).
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Per-run request budget.
    pub budget: u64,
}

fn default_concurrency() -> usize {
    4
}

fn default_retries() -> u32 {
    3
}

impl BackendConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_concurrency == 0 {
            return Err(GatewayError::InvalidConfig(
                "max_concurrency must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransportStatus {
    Ok,
    CacheHit,
}

/// One persisted backend response, the unit every later stage consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub case_id: String,
    pub attempt: u32,
    pub backend_id: String,
    /// Hash of rendered prompt + system prompt + params; stable across
    /// identical requests.
    pub request_fingerprint: String,
    pub response_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_usage: Option<u64>,
    pub timestamp: u64,
    pub transport_status: TransportStatus,
}

/// What a backend needs to answer one attempt of one case.
pub struct BackendRequest<'a> {
    pub case_id: &'a str,
    pub attempt: u32,
    pub fingerprint: &'a str,
    pub system_prompt: Option<&'a str>,
    pub user_prompt: &'a str,
    pub params: &'a serde_json::Map<String, serde_json::Value>,
}

pub struct BackendReply {
    pub text: String,
    pub token_usage: Option<u64>,
}

pub trait Backend: Send + Sync {
    fn complete(&self, request: &BackendRequest) -> Result<BackendReply, GatewayError>;
}

/// Stable hash of everything that shapes the request.
pub fn request_fingerprint(
    case: &PromptCase,
    params: &serde_json::Map<String, serde_json::Value>,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(case.rendered_prompt.as_bytes());
    hasher.update([0u8]);
    if let Some(system) = &case.system_prompt {
        hasher.update(system.as_bytes());
    }
    hasher.update([0u8]);
    hasher.update(serde_json::to_vec(params).expect("params serialize"));
    hex_digest(&hasher.finalize())
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

struct InFlight {
    gauge: Mutex<usize>,
    freed: Condvar,
    high_water: AtomicUsize,
}

/// Budgeted, cached, retrying front door to one backend.
pub struct Gateway {
    backend: Box<dyn Backend>,
    config: BackendConfig,
    spent: AtomicU64,
    cache: Mutex<HashMap<String, RawResponse>>,
    in_flight: InFlight,
    /// Base backoff; tests shrink it to keep retries fast.
    pub backoff: Duration,
}

impl Gateway {
    pub fn new(config: BackendConfig, backend: Box<dyn Backend>) -> Result<Self, GatewayError> {
        config.validate()?;
        Ok(Gateway {
            backend,
            config,
            spent: AtomicU64::new(0),
            cache: Mutex::new(HashMap::new()),
            in_flight: InFlight {
                gauge: Mutex::new(0),
                freed: Condvar::new(),
                high_water: AtomicUsize::new(0),
            },
            backoff: Duration::from_millis(100),
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Requests actually sent (cache hits excluded).
    pub fn spent(&self) -> u64 {
        self.spent.load(Ordering::SeqCst)
    }

    /// Peak concurrent in-flight requests observed so far.
    pub fn max_in_flight_observed(&self) -> usize {
        self.in_flight.high_water.load(Ordering::SeqCst)
    }

    /// Single query with cache. Identical requests are served from cache
    /// without spending budget.
    pub fn query(&self, case: &PromptCase) -> Result<RawResponse, GatewayError> {
        let fingerprint = request_fingerprint(case, &self.config.params);
        if let Some(hit) = self.cache.lock().unwrap().get(&fingerprint) {
            let mut cached = hit.clone();
            cached.transport_status = TransportStatus::CacheHit;
            return Ok(cached);
        }
        let response = self.send(case, 0, &fingerprint)?;
        self.cache
            .lock()
            .unwrap()
            .insert(fingerprint, response.clone());
        Ok(response)
    }

    /// One specific attempt of a case, bypassing the cache. Resume logic
    /// uses this to fill in exactly the missing attempts.
    pub fn query_attempt(
        &self,
        case: &PromptCase,
        attempt: u32,
    ) -> Result<RawResponse, GatewayError> {
        let fingerprint = request_fingerprint(case, &self.config.params);
        self.send(case, attempt, &fingerprint)
    }

    /// Exactly `repeat_budget` responses unless the budget runs out
    /// mid-case; the cache is bypassed so repeats stay independent.
    pub fn query_repeats(
        &self,
        case: &PromptCase,
    ) -> Result<(Vec<RawResponse>, bool), GatewayError> {
        let fingerprint = request_fingerprint(case, &self.config.params);
        let mut responses = Vec::with_capacity(case.repeat_budget as usize);
        for attempt in 0..case.repeat_budget {
            match self.send(case, attempt, &fingerprint) {
                Ok(response) => responses.push(response),
                Err(GatewayError::BudgetExhausted(_)) => return Ok((responses, true)),
                Err(other) => return Err(other),
            }
        }
        Ok((responses, false))
    }

    fn send(
        &self,
        case: &PromptCase,
        attempt: u32,
        fingerprint: &str,
    ) -> Result<RawResponse, GatewayError> {
        // reserve budget before going on the wire
        let mut current = self.spent.load(Ordering::SeqCst);
        loop {
            if current >= self.config.budget {
                return Err(GatewayError::BudgetExhausted(self.config.budget));
            }
            match self.spent.compare_exchange(
                current,
                current + 1,
                Ordering::SeqCst,
                Ordering::SeqCst,
            ) {
                Ok(_) => break,
                Err(now) => current = now,
            }
        }

        let request = BackendRequest {
            case_id: &case.case_id,
            attempt,
            fingerprint,
            system_prompt: case.system_prompt.as_deref(),
            user_prompt: &case.rendered_prompt,
            params: &self.config.params,
        };

        self.acquire_slot();
        let result = self.complete_with_retries(&request);
        self.release_slot();
        let reply = result?;

        Ok(RawResponse {
            case_id: case.case_id.clone(),
            attempt,
            backend_id: self.config.backend_id.clone(),
            request_fingerprint: fingerprint.to_string(),
            response_text: reply.text,
            token_usage: reply.token_usage,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            transport_status: TransportStatus::Ok,
        })
    }

    fn complete_with_retries(
        &self,
        request: &BackendRequest,
    ) -> Result<BackendReply, GatewayError> {
        let mut last_message = String::new();
        for retry in 0..=self.config.max_retries {
            match self.backend.complete(request) {
                Ok(reply) => return Ok(reply),
                // only transport-shaped failures are retryable
                Err(GatewayError::TransportError { message, .. }) => {
                    last_message = message;
                    if retry < self.config.max_retries {
                        std::thread::sleep(self.backoff * 2u32.pow(retry));
                    }
                }
                Err(other) => return Err(other),
            }
        }
        Err(GatewayError::TransportError {
            attempts: self.config.max_retries + 1,
            message: last_message,
        })
    }

    fn acquire_slot(&self) {
        let mut gauge = self.in_flight.gauge.lock().unwrap();
        while *gauge >= self.config.max_concurrency {
            gauge = self.in_flight.freed.wait(gauge).unwrap();
        }
        *gauge += 1;
        self.in_flight.high_water.fetch_max(*gauge, Ordering::SeqCst);
    }

    fn release_slot(&self) {
        let mut gauge = self.in_flight.gauge.lock().unwrap();
        *gauge -= 1;
        drop(gauge);
        self.in_flight.freed.notify_one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::TaskKind;
    use std::sync::Arc;

    fn case(id: &str) -> PromptCase {
        PromptCase {
            case_id: id.to_string(),
            task: TaskKind::Generation,
            scenario_id: "speech-recognition".into(),
            requirement_id: "voice-command".into(),
            seed: None,
            mutated_seed: None,
            debias: None,
            system_prompt: None,
            rendered_prompt: format!("prompt body for {id}"),
            repeat_budget: 20,
        }
    }

    fn echo_backend() -> Box<dyn Backend> {
        struct Echo;
        impl Backend for Echo {
            fn complete(&self, request: &BackendRequest) -> Result<BackendReply, GatewayError> {
                Ok(BackendReply {
                    text: format!("echo:{}:{}", request.case_id, request.attempt),
                    token_usage: Some(7),
                })
            }
        }
        Box::new(Echo)
    }

    fn config(budget: u64) -> BackendConfig {
        BackendConfig {
            backend_id: "test".into(),
            endpoint: None,
            model: None,
            auth_env: None,
            params: serde_json::Map::new(),
            max_concurrency: 2,
            max_retries: 2,
            budget,
        }
    }

    #[test]
    fn zero_budget_is_exhausted_immediately() {
        let gw = Gateway::new(config(0), echo_backend()).unwrap();
        assert!(matches!(
            gw.query(&case("a")),
            Err(GatewayError::BudgetExhausted(0))
        ));
    }

    #[test]
    fn cache_hit_spends_no_budget() {
        let gw = Gateway::new(config(10), echo_backend()).unwrap();
        let first = gw.query(&case("a")).unwrap();
        assert_eq!(first.transport_status, TransportStatus::Ok);
        let second = gw.query(&case("a")).unwrap();
        assert_eq!(second.transport_status, TransportStatus::CacheHit);
        assert_eq!(second.response_text, first.response_text);
        assert_eq!(gw.spent(), 1);
    }

    #[test]
    fn repeats_bypass_cache_and_spend() {
        let gw = Gateway::new(config(100), echo_backend()).unwrap();
        let (responses, truncated) = gw.query_repeats(&case("a")).unwrap();
        assert_eq!(responses.len(), 20);
        assert!(!truncated);
        assert_eq!(gw.spent(), 20);
        // each attempt hit the backend, not the cache
        assert!(responses
            .iter()
            .all(|r| r.transport_status == TransportStatus::Ok));
    }

    #[test]
    fn budget_mid_case_truncates() {
        let gw = Gateway::new(config(7), echo_backend()).unwrap();
        let (responses, truncated) = gw.query_repeats(&case("a")).unwrap();
        assert_eq!(responses.len(), 7);
        assert!(truncated);
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let params = serde_json::Map::new();
        let a = request_fingerprint(&case("a"), &params);
        assert_eq!(a, request_fingerprint(&case("a"), &params));
        assert_ne!(a, request_fingerprint(&case("b"), &params));
    }

    #[test]
    fn transient_failures_are_retried() {
        struct Flaky(AtomicU64);
        impl Backend for Flaky {
            fn complete(&self, request: &BackendRequest) -> Result<BackendReply, GatewayError> {
                if self.0.fetch_add(1, Ordering::SeqCst) < 2 {
                    Err(GatewayError::TransportError {
                        attempts: 1,
                        message: "503".into(),
                    })
                } else {
                    Ok(BackendReply {
                        text: format!("ok:{}", request.attempt),
                        token_usage: None,
                    })
                }
            }
        }
        let mut gw = Gateway::new(config(10), Box::new(Flaky(AtomicU64::new(0)))).unwrap();
        gw.backoff = Duration::from_millis(1);
        let response = gw.query(&case("a")).unwrap();
        assert_eq!(response.response_text, "ok:0");
    }

    #[test]
    fn concurrency_never_exceeds_bound() {
        struct Slow;
        impl Backend for Slow {
            fn complete(&self, _: &BackendRequest) -> Result<BackendReply, GatewayError> {
                std::thread::sleep(Duration::from_millis(5));
                Ok(BackendReply {
                    text: "ok".into(),
                    token_usage: None,
                })
            }
        }
        let gw = Arc::new(Gateway::new(config(1000), Box::new(Slow)).unwrap());
        let handles: Vec<_> = (0..16)
            .map(|i| {
                let gw = Arc::clone(&gw);
                std::thread::spawn(move || gw.query(&case(&format!("c{i}"))).unwrap())
            })
            .collect();
        for handle in handles {
            handle.join().unwrap();
        }
        assert!(gw.max_in_flight_observed() <= 2);
        assert!(gw.max_in_flight_observed() >= 1);
    }
}
