use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model endpoint unreachable: {0}")]
    Transport(String),
    #[error("model endpoint returned status {0}")]
    Status(u16),
}

/// A text-generation backend. Closures `Fn(&str) -> Result<String, _>` work
/// as in-process models.
pub trait ModelBackend: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, ModelError>;
}

impl<F> ModelBackend for F
where
    F: Fn(&str) -> Result<String, ModelError> + Send + Sync,
{
    fn generate(&self, prompt: &str) -> Result<String, ModelError> {
        self(prompt)
    }
}

/// POSTs `{model, prompt, max_tokens, temperature: 0}` to one endpoint.
pub struct HttpModel {
    endpoint: String,
    model: String,
    max_tokens: u32,
    agent: ureq::Agent,
}

impl HttpModel {
    pub fn new(endpoint: &str, model: &str, timeout: Duration, max_tokens: u32) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpModel {
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            max_tokens,
            agent,
        }
    }
}

/// Generated text from common completion response shapes, else the raw
/// body.
pub fn response_text(body: &str) -> String {
    let Ok(v) = serde_json::from_str::<Value>(body) else {
        return body.to_string();
    };
    let candidates = [
        v.get("response"),
        v.get("content"),
        v.get("text"),
        v.pointer("/choices/0/text"),
        v.pointer("/choices/0/message/content"),
    ];
    let text = candidates
        .into_iter()
        .flatten()
        .find_map(|s| s.as_str().map(str::to_string));
    text.unwrap_or_else(|| body.to_string())
}

impl ModelBackend for HttpModel {
    fn generate(&self, prompt: &str) -> Result<String, ModelError> {
        let payload = json!({
            "model": self.model,
            "prompt": prompt,
            "max_tokens": self.max_tokens,
            "temperature": 0,
        });
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json")
            .send(payload.to_string())
            .map_err(|e| ModelError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status >= 400 {
            return Err(ModelError::Status(status));
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ModelError::Transport(e.to_string()))?;
        Ok(response_text(&body))
    }
}
