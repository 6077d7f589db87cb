use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
    pub content_type: String,
}

impl HttpResponse {
    pub fn new(status: u16, content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        HttpResponse {
            status,
            body: body.into(),
            content_type: content_type.to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("{0}")]
    Other(String),
}

/// One blocking HTTP GET. Closures with the same signature are transports,
/// which is how tests and demos serve canned responses.
pub trait HttpTransport: Send + Sync {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

impl<F> HttpTransport for F
where
    F: Fn(&HttpRequest) -> Result<HttpResponse, TransportError> + Send + Sync,
{
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self(request)
    }
}

/// Real network access through `ureq`.
pub struct UreqTransport {
    agent: ureq::Agent,
    max_body: u64,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        UreqTransport {
            agent,
            max_body: 64 * 1024 * 1024,
        }
    }
}

impl HttpTransport for UreqTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let map = |e: ureq::Error| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            e => TransportError::Other(e.to_string()),
        };
        let mut req = self.agent.get(&request.url);
        for (k, v) in &request.headers {
            req = req.header(k, v);
        }
        let mut resp = req.call().map_err(map)?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_string();
        let body = resp
            .body_mut()
            .with_config()
            .limit(self.max_body)
            .read_to_vec()
            .map_err(map)?;
        Ok(HttpResponse {
            status,
            body,
            content_type,
        })
    }
}

/// Serves canned responses keyed by URL substring and records every request.
/// The longest matching key wins; unmatched URLs get a 404.
#[derive(Default)]
pub struct FixtureTransport {
    routes: BTreeMap<String, HttpResponse>,
    log: Mutex<Vec<String>>,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn route(mut self, url_part: &str, response: HttpResponse) -> Self {
        self.routes.insert(url_part.to_string(), response);
        self
    }

    pub fn insert(&mut self, url_part: &str, response: HttpResponse) {
        self.routes.insert(url_part.to_string(), response);
    }

    /// URLs requested so far, in arrival order.
    pub fn requests(&self) -> Vec<String> {
        self.log.lock().expect("log lock").clone()
    }
}

impl HttpTransport for FixtureTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.log.lock().expect("log lock").push(request.url.clone());
        Ok(self
            .routes
            .iter()
            .filter(|(k, _)| request.url.contains(k.as_str()))
            .max_by_key(|(k, _)| k.len())
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| HttpResponse::new(404, "text/plain", "not found")))
    }
}
