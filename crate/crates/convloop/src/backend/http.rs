//! OpenAI-compatible HTTP backend covering both the completions and the
//! chat-completions wire shapes, with retry/backoff on transient failures.

use super::{
    BackendError, GenerationBackend, GenerationRequest, GenerationResponse,
    DEFAULT_REQUEST_TIMEOUT_MS,
};
use serde_json::json;
use std::time::{Duration, Instant};

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "CONVLOOP_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HttpApi {
    /// POST body carries `prompt`; answer in `choices[0].text`.
    Completions,
    /// POST body carries a single user message; answer in
    /// `choices[0].message.content`.
    ChatCompletions,
}

#[derive(Debug, Clone)]
pub struct HttpBackendConfig {
    pub endpoint: String,
    pub model: String,
    pub api: HttpApi,
    pub api_key: Option<String>,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub request_timeout_ms: u64,
}

impl HttpBackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api: HttpApi) -> Self {
        HttpBackendConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api,
            api_key: std::env::var(API_KEY_ENV).ok(),
            max_retries: 3,
            backoff_base_ms: 1000,
            request_timeout_ms: DEFAULT_REQUEST_TIMEOUT_MS,
        }
    }
}

pub struct HttpBackend {
    cfg: HttpBackendConfig,
    client: reqwest::blocking::Client,
    name: String,
}

impl HttpBackend {
    pub fn new(cfg: HttpBackendConfig) -> Result<HttpBackend, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.request_timeout_ms))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(HttpBackend {
            name: format!("http:{}", cfg.model),
            cfg,
            client,
        })
    }

    fn backoff(&self, attempt: u32) -> Duration {
        // 1s, 2s, 4s, ... at the default base
        Duration::from_millis(self.cfg.backoff_base_ms.saturating_mul(1u64 << attempt.min(16)))
    }
}

/// Request body in the OpenAI-compatible shape for the configured dialect.
pub fn build_request_body(cfg: &HttpBackendConfig, request: &GenerationRequest) -> serde_json::Value {
    let mut body = json!({
        "model": cfg.model,
        "top_p": request.top_p,
        "temperature": request.temperature,
        "max_tokens": request.max_generation_tokens,
    });
    if !request.stop_sequences.is_empty() {
        body["stop"] = json!(request.stop_sequences);
    }
    match cfg.api {
        HttpApi::Completions => {
            body["prompt"] = json!(request.prompt.text());
        }
        HttpApi::ChatCompletions => {
            body["messages"] = json!([{ "role": "user", "content": request.prompt.text() }]);
        }
    }
    body
}

/// Pull the completion text out of a response body for the given dialect.
pub fn extract_response_text(api: HttpApi, body: &serde_json::Value) -> Option<String> {
    let choice = body.get("choices")?.get(0)?;
    let text = match api {
        HttpApi::Completions => choice.get("text")?,
        HttpApi::ChatCompletions => choice.get("message")?.get("content")?,
    };
    text.as_str().map(str::to_string)
}

impl GenerationBackend for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let started = Instant::now();
        let body = build_request_body(&self.cfg, request);
        let mut last_error: Option<BackendError> = None;

        for attempt in 0..=self.cfg.max_retries {
            if attempt > 0 {
                let wait = match &last_error {
                    Some(BackendError::RateLimited { message, .. }) => message
                        .strip_prefix("retry-after:")
                        .and_then(|s| s.trim().parse::<u64>().ok())
                        .map(Duration::from_secs)
                        .unwrap_or_else(|| self.backoff(attempt - 1)),
                    _ => self.backoff(attempt - 1),
                };
                std::thread::sleep(wait);
            }

            let mut req = self
                .client
                .post(&self.cfg.endpoint)
                .header("content-type", "application/json")
                .json(&body);
            if let Some(key) = &self.cfg.api_key {
                req = req.header("authorization", format!("Bearer {key}"));
            }

            let response = match req.send() {
                Ok(r) => r,
                Err(e) => {
                    last_error = Some(BackendError::Network {
                        attempts: attempt + 1,
                        message: e.to_string(),
                    });
                    continue;
                }
            };

            let status = response.status();
            if status.as_u16() == 429 {
                let retry_after = response
                    .headers()
                    .get("retry-after")
                    .and_then(|v| v.to_str().ok())
                    .unwrap_or("");
                last_error = Some(BackendError::RateLimited {
                    attempts: attempt + 1,
                    message: format!("retry-after:{retry_after}"),
                });
                continue;
            }
            if status.is_server_error() {
                last_error = Some(BackendError::Network {
                    attempts: attempt + 1,
                    message: format!("server error {status}"),
                });
                continue;
            }
            if !status.is_success() {
                // client errors are not transient: fail fast
                let text = response.text().unwrap_or_default();
                return Err(BackendError::Http {
                    status: status.as_u16(),
                    body: text.chars().take(500).collect(),
                });
            }

            let parsed: serde_json::Value = response.json().map_err(|e| BackendError::Http {
                status: status.as_u16(),
                body: format!("unparseable response body: {e}"),
            })?;
            let raw_text =
                extract_response_text(self.cfg.api, &parsed).ok_or_else(|| BackendError::Http {
                    status: status.as_u16(),
                    body: format!(
                        "response lacks the expected completion field: {}",
                        parsed.to_string().chars().take(300).collect::<String>()
                    ),
                })?;
            return Ok(GenerationResponse {
                raw_text,
                backend_name: self.name.clone(),
                latency_ms: started.elapsed().as_millis() as u64,
            });
        }

        Err(last_error.unwrap_or_else(|| BackendError::Network {
            attempts: self.cfg.max_retries + 1,
            message: "no attempt was made".to_string(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::PromptText;

    fn request() -> GenerationRequest {
        GenerationRequest {
            prompt: PromptText::new("fix it".into()),
            top_p: 0.95,
            temperature: 1.0,
            max_generation_tokens: 512,
            stop_sequences: vec!["```".into()],
            turn: None,
        }
    }

    #[test]
    fn completion_body_shape() {
        let cfg = HttpBackendConfig {
            endpoint: "http://localhost/v1/completions".into(),
            model: "code-model".into(),
            api: HttpApi::Completions,
            api_key: None,
            max_retries: 3,
            backoff_base_ms: 1000,
            request_timeout_ms: 1000,
        };
        let body = build_request_body(&cfg, &request());
        assert_eq!(body["model"], "code-model");
        assert_eq!(body["prompt"], "fix it");
        assert_eq!(body["top_p"], 0.95);
        assert_eq!(body["temperature"], 1.0);
        assert_eq!(body["max_tokens"], 512);
        assert_eq!(body["stop"][0], "```");
        assert!(body.get("messages").is_none());
    }

    #[test]
    fn chat_body_shape() {
        let mut cfg = HttpBackendConfig::new("http://x/v1/chat/completions", "m", HttpApi::ChatCompletions);
        cfg.api_key = None;
        let body = build_request_body(&cfg, &request());
        assert_eq!(body["messages"][0]["role"], "user");
        assert_eq!(body["messages"][0]["content"], "fix it");
        assert!(body.get("prompt").is_none());
    }

    #[test]
    fn response_text_extraction() {
        let completion = serde_json::json!({ "choices": [ { "text": "patched" } ] });
        assert_eq!(
            extract_response_text(HttpApi::Completions, &completion).as_deref(),
            Some("patched")
        );
        let chat = serde_json::json!({ "choices": [ { "message": { "content": "patched" } } ] });
        assert_eq!(
            extract_response_text(HttpApi::ChatCompletions, &chat).as_deref(),
            Some("patched")
        );
        assert_eq!(
            extract_response_text(HttpApi::Completions, &serde_json::json!({})),
            None
        );
    }
}
