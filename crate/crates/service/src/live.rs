//! Chat-completions adapter for a hosted or local model server.
//!
//! Configured from the environment:
//!
//! | variable | default |
//! |---|---|
//! | `ALIAS_LLM_URL` | `http://127.0.0.1:8080/v1/chat/completions` |
//! | `ALIAS_LLM_MODEL` | `gpt-4o-mini` |
//! | `ALIAS_LLM_API_KEY` | none |
//! | `ALIAS_LLM_TIMEOUT_MS` | `5000` |

use std::time::Duration;

use alias_core::llm::{AdapterError, LlmAdapter, LlmRequest, Purpose};
use serde::{Deserialize, Serialize};

pub const DEFAULT_URL: &str = "http://127.0.0.1:8080/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveConfig {
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self { url: DEFAULT_URL.into(), model: DEFAULT_MODEL.into(), api_key: None, timeout: DEFAULT_TIMEOUT }
    }
}

impl LiveConfig {
    pub fn from_env() -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Ok(url) = std::env::var("ALIAS_LLM_URL") {
            cfg.url = url;
        }
        if let Ok(model) = std::env::var("ALIAS_LLM_MODEL") {
            cfg.model = model;
        }
        cfg.api_key = std::env::var("ALIAS_LLM_API_KEY").ok().filter(|k| !k.is_empty());
        if let Ok(ms) = std::env::var("ALIAS_LLM_TIMEOUT_MS") {
            let ms: u64 = ms.parse().map_err(|_| format!("ALIAS_LLM_TIMEOUT_MS is not a number: {ms}"))?;
            cfg.timeout = Duration::from_millis(ms);
        }
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [Message<'a>; 2],
    temperature: f32,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Reply,
}

#[derive(Deserialize)]
struct Reply {
    content: Option<String>,
}

pub struct LiveAdapter {
    config: LiveConfig,
    agent: ureq::Agent,
}

impl LiveAdapter {
    pub fn new(config: LiveConfig) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        Self { config, agent }
    }
}

impl LlmAdapter for LiveAdapter {
    fn complete(&mut self, request: &LlmRequest) -> Result<String, AdapterError> {
        // verdicts must be terse and repeatable
        let temperature = if request.purpose == Purpose::Arbitration { 0.0 } else { 0.7 };
        let body = ChatRequest {
            model: &self.config.model,
            messages: [
                Message { role: "system", content: &request.system },
                Message { role: "user", content: &request.user },
            ],
            temperature,
        };
        let mut call = self.agent.post(&self.config.url);
        if let Some(key) = &self.config.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let response = call.send_json(&body).map_err(adapter_error)?;
        let parsed: ChatResponse = response.into_body().read_json().map_err(adapter_error)?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|c| !c.trim().is_empty())
            .ok_or_else(|| AdapterError::Unavailable("model returned no content".into()))
    }
}

fn adapter_error(e: ureq::Error) -> AdapterError {
    match e {
        ureq::Error::Timeout(_) => AdapterError::Timeout,
        other => AdapterError::Unavailable(other.to_string()),
    }
}
