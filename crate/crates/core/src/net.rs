//! Minimal JSON-over-HTTP transport shared by the paraphrase client and the
//! HTTP embedder.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use thiserror::Error;

static NETWORK_OPERATIONS: AtomicU64 = AtomicU64::new(0);

/// When set to a non-empty value, any attempt to open a connection panics.
/// Test harnesses use it to prove a run stays offline.
pub const OFFLINE_ENV: &str = "TKGQA_OFFLINE";

/// Requests attempted by [`UreqTransport`] in this process.
pub fn network_operations() -> u64 {
    NETWORK_OPERATIONS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// Rate limiting and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        self.status == 429 || self.status >= 500
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connection(String),
}

pub trait Transport: Send + Sync {
    fn post_json(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// Blocking HTTP client with a per-request timeout.
#[derive(Debug, Clone)]
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        UreqTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Transport for UreqTransport {
    fn post_json(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        NETWORK_OPERATIONS.fetch_add(1, Ordering::SeqCst);
        if std::env::var_os(OFFLINE_ENV).is_some_and(|v| !v.is_empty()) {
            panic!(
                "network access to {} attempted while {OFFLINE_ENV} is set",
                request.url
            );
        }
        let mut req = self
            .agent
            .post(&request.url)
            .header("Content-Type", "application/json");
        for (k, v) in &request.headers {
            req = req.header(k, v);
        }
        let mut resp = req.send(request.body.as_str()).map_err(classify)?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(classify)?;
        Ok(HttpResponse { status, body })
    }
}

fn classify(e: ureq::Error) -> TransportError {
    match e {
        ureq::Error::Timeout(_) => TransportError::Timeout,
        other => TransportError::Connection(other.to_string()),
    }
}
