//! Network retrieval: NCBI E-utilities, bioRxiv result pages and supplement
//! links, all behind a shared per-host-class rate limiter with retry and
//! exponential backoff.

mod biorxiv;
mod browser;
mod eutils;
mod limiter;
mod supplements;
mod transport;

pub use biorxiv::{biorxiv_search_url, parse_biorxiv_results};
pub use browser::{BrowserHook, BrowserError};
pub use eutils::{efetch_urls, esearch_url, parse_esearch, Database, EFETCH_BATCH};
pub use limiter::RateLimiter;
pub use supplements::{harvest_supplements, SupplementKind, SupplementLink};
pub use transport::{FixtureTransport, HttpRequest, HttpResponse, HttpTransport, TransportError, UreqTransport};

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, warn};

/// Environment variable holding an NCBI API key.
pub const API_KEY_ENV: &str = "NCBI_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HostClass {
    #[serde(rename = "NCBI")]
    Ncbi,
    Publisher,
    BioRxiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Purpose {
    Search,
    Fetch,
    Supplement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub url: String,
    pub host_class: HostClass,
    pub purpose: Purpose,
}

impl FetchRequest {
    pub fn new(url: impl Into<String>, host_class: HostClass, purpose: Purpose) -> Self {
        FetchRequest {
            url: url.into(),
            host_class,
            purpose,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchResult {
    pub status: u16,
    pub body: Vec<u8>,
    pub content_type: String,
    /// Requests sent, including the successful one.
    pub attempts: u32,
    pub elapsed: Duration,
}

impl FetchResult {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    pub fn text(&self) -> Result<&str, NetError> {
        std::str::from_utf8(&self.body).map_err(|e| NetError::MalformedResponse(format!("body is not UTF-8: {e}")))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("network error after {attempts} attempt(s): {detail}")]
    Network { attempts: u32, detail: String },
    #[error("invalid url {0:?}")]
    InvalidUrl(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid network config: {0}")]
    Config(String),
}

/// Request rates and the retry schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateLimiterConfig {
    pub ncbi_rps: f64,
    /// NCBI rate used when an API key is configured.
    pub ncbi_rps_with_key: f64,
    pub publisher_rps: f64,
    pub biorxiv_rps: f64,
    pub max_retries: u32,
    pub base_backoff_s: f64,
    /// Upper bound of the random extra delay, as a fraction of the base delay.
    pub jitter: f64,
}

impl Default for RateLimiterConfig {
    fn default() -> Self {
        RateLimiterConfig {
            ncbi_rps: 3.0,
            ncbi_rps_with_key: 10.0,
            publisher_rps: 1.0,
            biorxiv_rps: 1.0,
            max_retries: 4,
            base_backoff_s: 1.0,
            jitter: 0.5,
        }
    }
}

impl RateLimiterConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let rates = [
            ("ncbi_rps", self.ncbi_rps),
            ("ncbi_rps_with_key", self.ncbi_rps_with_key),
            ("publisher_rps", self.publisher_rps),
            ("biorxiv_rps", self.biorxiv_rps),
            ("base_backoff_s", self.base_backoff_s),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v > 0.0) {
                return Err(NetError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(NetError::Config(format!("jitter must be within [0, 1], got {}", self.jitter)));
        }
        Ok(())
    }

    pub fn base_backoff(&self) -> Duration {
        Duration::from_secs_f64(self.base_backoff_s)
    }

    /// Delay before retry number `attempt` (1-based), with `u` in `[0, 1]`
    /// selecting the jitter: `base * 2^(attempt-1) * (1 + jitter * u)`.
    pub fn backoff_delay(&self, attempt: u32, u: f64) -> Duration {
        let factor = 2f64.powi(attempt.saturating_sub(1).min(30) as i32);
        Duration::from_secs_f64(self.base_backoff_s * factor * (1.0 + self.jitter * u.clamp(0.0, 1.0)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    #[serde(flatten)]
    pub limits: RateLimiterConfig,
    pub timeout_s: u64,
    pub eutils_base: String,
    pub pmc_base: String,
    pub biorxiv_base: String,
    pub user_agent: String,
    pub contact_email: String,
    /// Read from `NCBI_API_KEY` when not set in the config file.
    pub api_key: Option<String>,
    /// Identifiers requested per esearch.
    pub retmax: usize,
    /// Anti-bot fallback, e.g. `"fetch-with-browser {url} {output}"`.
    pub browser_cmd: Option<String>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            limits: RateLimiterConfig::default(),
            timeout_s: 30,
            eutils_base: "https://eutils.ncbi.nlm.nih.gov/entrez/eutils".into(),
            pmc_base: "https://www.ncbi.nlm.nih.gov/pmc".into(),
            biorxiv_base: "https://www.biorxiv.org".into(),
            user_agent: format!("aptamine/{}", env!("CARGO_PKG_VERSION")),
            contact_email: String::new(),
            api_key: None,
            retmax: 20,
            browser_cmd: None,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        self.limits.validate()?;
        if self.timeout_s == 0 {
            return Err(NetError::Config("timeout_s must be positive".into()));
        }
        if self.retmax == 0 {
            return Err(NetError::Config("retmax must be positive".into()));
        }
        for base in [&self.eutils_base, &self.pmc_base, &self.biorxiv_base] {
            check_url(base)?;
        }
        Ok(())
    }

    /// NCBI rate in effect, raised when an API key is present.
    pub fn effective_ncbi_rps(&self) -> f64 {
        if self.api_key.is_some() {
            self.limits.ncbi_rps_with_key
        } else {
            self.limits.ncbi_rps
        }
    }

    pub fn user_agent_header(&self) -> String {
        if self.contact_email.is_empty() {
            self.user_agent.clone()
        } else {
            format!("{} (mailto:{})", self.user_agent, self.contact_email)
        }
    }

    pub fn limiter(&self) -> RateLimiter {
        RateLimiter::new(self.effective_ncbi_rps(), self.limits.publisher_rps, self.limits.biorxiv_rps)
    }
}

fn check_url(raw: &str) -> Result<url::Url, NetError> {
    match url::Url::parse(raw) {
        Ok(u) if matches!(u.scheme(), "http" | "https") && u.has_host() => Ok(u),
        _ => Err(NetError::InvalidUrl(raw.to_string())),
    }
}

/// Issues requests through a transport, admitting each attempt through the
/// shared limiter. Cloning shares the limiter.
#[derive(Clone)]
pub struct Fetcher {
    config: NetConfig,
    transport: Arc<dyn HttpTransport>,
    limiter: Arc<RateLimiter>,
}

impl std::fmt::Debug for Fetcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fetcher").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Fetcher {
    pub fn new(config: NetConfig, transport: Arc<dyn HttpTransport>) -> Result<Self, NetError> {
        config.validate()?;
        let limiter = Arc::new(config.limiter());
        Ok(Fetcher {
            config,
            transport,
            limiter,
        })
    }

    /// A fetcher on the real network.
    pub fn live(config: NetConfig) -> Result<Self, NetError> {
        let transport = Arc::new(UreqTransport::new(Duration::from_secs(config.timeout_s)));
        Self::new(config, transport)
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn limiter(&self) -> &RateLimiter {
        &self.limiter
    }

    /// Sends `request`, retrying on 429, 5xx and timeouts. Other statuses,
    /// including 4xx, are returned as they are.
    pub fn acquire(&self, request: &FetchRequest) -> Result<FetchResult, NetError> {
        check_url(&request.url)?;
        let http = HttpRequest {
            url: request.url.clone(),
            headers: vec![("User-Agent".into(), self.config.user_agent_header())],
        };
        let limits = &self.config.limits;
        let start = Instant::now();
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.limiter.admit(request.host_class);
            let outcome = self.transport.execute(&http);
            let detail = match outcome {
                Ok(r) if r.status != 429 && r.status < 500 => {
                    debug!(url = %request.url, status = r.status, attempt, "fetched");
                    return Ok(FetchResult {
                        status: r.status,
                        body: r.body,
                        content_type: r.content_type,
                        attempts: attempt,
                        elapsed: start.elapsed(),
                    });
                }
                Ok(r) => format!("HTTP {}", r.status),
                Err(TransportError::Timeout) => "timeout".to_string(),
                Err(TransportError::Other(e)) => {
                    return Err(NetError::Network {
                        attempts: attempt,
                        detail: e,
                    })
                }
            };
            if attempt > limits.max_retries {
                return Err(NetError::Network {
                    attempts: attempt,
                    detail,
                });
            }
            let delay = limits.backoff_delay(attempt, rand::thread_rng().gen_range(0.0..=1.0));
            warn!(url = %request.url, %detail, attempt, delay_s = delay.as_secs_f64(), "retrying");
            std::thread::sleep(delay);
        }
    }
}
