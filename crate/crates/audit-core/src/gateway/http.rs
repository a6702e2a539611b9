//! Chat-completion HTTP backend (OpenAI-compatible wire shape).

use serde_json::json;

use super::{Backend, BackendReply, BackendRequest, GatewayError};

pub struct HttpBackend {
    endpoint: String,
    model: String,
    auth_env: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(endpoint: &str, model: &str, auth_env: Option<&str>) -> Self {
        HttpBackend {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            auth_env: auth_env.map(String::from),
            client: reqwest::blocking::Client::new(),
        }
    }

    fn api_key(&self) -> Result<Option<String>, GatewayError> {
        match &self.auth_env {
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| GatewayError::AuthMissing(var.clone())),
            None => Ok(None),
        }
    }
}

impl Backend for HttpBackend {
    fn complete(&self, request: &BackendRequest) -> Result<BackendReply, GatewayError> {
        let key = self.api_key()?;

        let mut messages = Vec::new();
        if let Some(system) = request.system_prompt {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": request.user_prompt}));

        let mut body = json!({"model": self.model, "messages": messages});
        for (k, v) in request.params {
            body[k] = v.clone();
        }

        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = key {
            req = req.bearer_auth(key);
        }

        let transport = |message: String| GatewayError::TransportError {
            attempts: 1,
            message,
        };

        let response = req.send().map_err(|e| transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(transport(format!("HTTP {status}")));
        }
        // malformed bodies are transport-shaped: the caller retries them
        let parsed: serde_json::Value = response.json().map_err(|e| transport(e.to_string()))?;
        let text = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| transport("reply missing choices[0].message.content".into()))?
            .to_string();
        let token_usage = parsed["usage"]["total_tokens"].as_u64();
        Ok(BackendReply { text, token_usage })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_auth_var_is_reported_before_any_request() {
        let backend = HttpBackend::new(
            "http://127.0.0.1:9/v1/chat/completions",
            "m",
            Some("AUDIT_TEST_UNSET_KEY_VAR"),
        );
        let params = serde_json::Map::new();
        let request = BackendRequest {
            case_id: "c",
            attempt: 0,
            fingerprint: "f",
            system_prompt: None,
            user_prompt: "hi",
            params: &params,
        };
        assert!(matches!(
            backend.complete(&request),
            Err(GatewayError::AuthMissing(var)) if var == "AUDIT_TEST_UNSET_KEY_VAR"
        ));
    }
}
