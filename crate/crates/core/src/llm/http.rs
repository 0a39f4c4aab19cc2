use std::time::Duration;

use super::{CompletionProvider, LlmRequest, ProviderFailure};
use crate::error::{Error, Result};

pub const API_KEY_ENV: &str = "TRIPLEFORGE_API_KEY";

/// Chat-completions client (`messages[{role, content}]` in,
/// `choices[0].message.content` out).
pub struct HttpChatProvider {
    endpoint: String,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpChatProvider {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        HttpChatProvider {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            agent: ureq::AgentBuilder::new()
                .timeout_connect(Duration::from_secs(10))
                .timeout(Duration::from_secs(120))
                .build(),
        }
    }

    /// Reads the key from `TRIPLEFORGE_API_KEY`.
    pub fn from_env(endpoint: impl Into<String>) -> Result<Self> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| Error::Config(format!("{API_KEY_ENV} is not set")))?;
        Ok(Self::new(endpoint, key))
    }

    fn body(request: &LlmRequest) -> serde_json::Value {
        let mut body = serde_json::json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        });
        if !request.stop_sequences.is_empty() {
            body["stop"] = serde_json::json!(request.stop_sequences);
        }
        if request.max_output_chars_hint > 0 {
            // roughly three characters per token
            body["max_tokens"] = serde_json::json!(request.max_output_chars_hint.div_ceil(3));
        }
        body
    }
}

impl CompletionProvider for HttpChatProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &LlmRequest) -> std::result::Result<String, ProviderFailure> {
        let resp = self
            .agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(Self::body(request))
            .map_err(|e| match e {
                ureq::Error::Status(code, r) => ProviderFailure::from_status(code, r.into_string().unwrap_or_default()),
                ureq::Error::Transport(t) => ProviderFailure::transient(None, t.to_string()),
            })?;
        let value: serde_json::Value = resp
            .into_json()
            .map_err(|e| ProviderFailure::transient(None, format!("unreadable body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ProviderFailure::permanent(None, "response lacks choices[0].message.content"))
    }
}
