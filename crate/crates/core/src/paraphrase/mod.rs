//! Optional rewriting of template questions through a chat-completion
//! endpoint.
//!
//! The identity provider leaves every question untouched and never touches
//! the network. The HTTP provider sends each distinct question once, caches
//! the raw reply, and keeps a rewrite only if every entity name, timestamp
//! and option of the template question still appears in it.

mod cache;

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::generator::QAPair;
use crate::net::{HttpRequest, Transport, TransportError};

pub use cache::{cache_key, ParaphraseCache, ParaphraseCacheEntry};

/// Environment variable holding the bearer token for the endpoint.
pub const API_KEY_ENV: &str = "TKGQA_API_KEY";

pub const DEFAULT_PROMPT_VERSION: &str = "v1";

const PROMPT_V1: &str = "You rewrite quiz questions. Rephrase the user's question so it reads \
naturally while asking exactly the same thing. Copy every name, date, number and listed option \
character for character. Reply with the rewritten question only, on one line.";

/// System prompt for a prompt version tag.
pub fn prompt(version: &str) -> Option<&'static str> {
    match version {
        "v1" => Some(PROMPT_V1),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Identity,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParaphraseProvider {
    pub kind: ProviderKind,
    pub endpoint_url: String,
    pub model_name: String,
    pub prompt_version: String,
    /// Per-request timeout in seconds.
    pub timeout: f64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_cap_ms: u64,
    /// Requests in flight at once.
    pub concurrency: usize,
}

impl Default for ParaphraseProvider {
    fn default() -> Self {
        ParaphraseProvider {
            kind: ProviderKind::Identity,
            endpoint_url: String::new(),
            model_name: String::new(),
            prompt_version: DEFAULT_PROMPT_VERSION.into(),
            timeout: 30.0,
            max_retries: 3,
            backoff_base_ms: 1_000,
            backoff_cap_ms: 30_000,
            concurrency: 4,
        }
    }
}

impl ParaphraseProvider {
    pub fn identity() -> Self {
        ParaphraseProvider::default()
    }

    pub fn http(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        ParaphraseProvider {
            kind: ProviderKind::Http,
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            ..ParaphraseProvider::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParaphraseError> {
        if self.kind == ProviderKind::Http {
            if self.endpoint_url.trim().is_empty() {
                return Err(ParaphraseError::Config(
                    "http provider needs an endpoint url".into(),
                ));
            }
            if prompt(&self.prompt_version).is_none() {
                return Err(ParaphraseError::Config(format!(
                    "unknown prompt version `{}`",
                    self.prompt_version
                )));
            }
            if !(self.timeout > 0.0 && self.timeout.is_finite()) {
                return Err(ParaphraseError::Config("timeout must be positive".into()));
            }
            if self.concurrency == 0 {
                return Err(ParaphraseError::Config(
                    "concurrency must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn timeout_duration(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }

    /// Delay before retry `attempt` (0-based): exponential, capped, with
    /// jitter in `[0.5, 1.0)` of the nominal value.
    pub fn backoff(&self, attempt: u32, rng: &mut impl Rng) -> Duration {
        let nominal = self
            .backoff_base_ms
            .saturating_mul(1u64.checked_shl(attempt).unwrap_or(u64::MAX))
            .min(self.backoff_cap_ms);
        let factor = 0.5 + 0.5 * rng.random::<f64>();
        Duration::from_millis((nominal as f64 * factor) as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParaphraseError {
    #[error("paraphrase configuration: {0}")]
    Config(String),
    #[error("paraphrase cache: {0}")]
    Cache(String),
}

/// Why a single request produced no usable text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("endpoint answered HTTP {0}")]
    Status(u16),
    #[error("malformed response body: {0}")]
    Malformed(String),
}

/// Counts from one [`paraphrase_all`] run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParaphraseReport {
    pub pairs: usize,
    pub cache_hits: usize,
    pub fetched: usize,
    pub failed: usize,
    pub accepted: usize,
    pub rejected_by_guard: usize,
}

fn request_body(provider: &ParaphraseProvider, question: &str) -> String {
    json!({
        "model": provider.model_name,
        "messages": [
            {"role": "system", "content": prompt(&provider.prompt_version).unwrap_or(PROMPT_V1)},
            {"role": "user", "content": question},
        ],
    })
    .to_string()
}

/// Content of the first choice of a chat-completion reply.
pub fn parse_reply(body: &str) -> Result<String, FetchError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| FetchError::Malformed(e.to_string()))?;
    let text = v
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .ok_or_else(|| FetchError::Malformed("no choices[0].message.content".into()))?
        .trim()
        .to_string();
    if text.is_empty() {
        return Err(FetchError::Malformed("empty content".into()));
    }
    Ok(text)
}

/// One question through the endpoint, retrying rate limits, server errors
/// and transport failures.
pub fn fetch(
    provider: &ParaphraseProvider,
    transport: &dyn Transport,
    api_key: Option<&str>,
    question: &str,
) -> Result<String, FetchError> {
    let mut headers = Vec::new();
    if let Some(k) = api_key {
        headers.push(("Authorization".to_string(), format!("Bearer {k}")));
    }
    let req = HttpRequest {
        url: provider.endpoint_url.clone(),
        headers,
        body: request_body(provider, question),
    };
    let mut rng = rand::rng();
    let mut attempt = 0;
    loop {
        let err = match transport.post_json(&req) {
            Ok(resp) if resp.is_success() => return parse_reply(&resp.body),
            Ok(resp) if resp.is_retryable() => FetchError::Status(resp.status),
            Ok(resp) => return Err(FetchError::Status(resp.status)),
            Err(e) => FetchError::Transport(e),
        };
        if attempt >= provider.max_retries {
            return Err(err);
        }
        let wait = provider.backoff(attempt, &mut rng);
        log::debug!("paraphrase request failed ({err}); retrying in {wait:?}");
        std::thread::sleep(wait);
        attempt += 1;
    }
}

/// Whether `candidate` may replace the question of `pair`.
pub fn guard(pair: &QAPair, candidate: &str) -> bool {
    let c = candidate.trim();
    !c.is_empty() && !c.contains('\n') && pair.surface_forms.iter().all(|s| c.contains(s.as_str()))
}

/// Single-pair form of [`paraphrase_all`].
pub fn paraphrase(
    pair: &QAPair,
    provider: &ParaphraseProvider,
    cache: &mut ParaphraseCache,
    transport: &dyn Transport,
) -> Result<QAPair, ParaphraseError> {
    let mut one = [pair.clone()];
    paraphrase_all(&mut one, provider, cache, transport)?;
    let [out] = one;
    Ok(out)
}

/// Rewrites the questions of `pairs` in place.
///
/// Distinct uncached questions are fetched with up to
/// `provider.concurrency` requests in flight; replies are cached and applied
/// in pair-id order. Failed requests and rewrites rejected by [`guard`] keep
/// the template question with `paraphrased = false`.
pub fn paraphrase_all(
    pairs: &mut [QAPair],
    provider: &ParaphraseProvider,
    cache: &mut ParaphraseCache,
    transport: &dyn Transport,
) -> Result<ParaphraseReport, ParaphraseError> {
    provider.validate()?;
    let mut report = ParaphraseReport {
        pairs: pairs.len(),
        ..ParaphraseReport::default()
    };
    if provider.kind == ProviderKind::Identity {
        for p in pairs.iter_mut() {
            p.paraphrased = false;
        }
        return Ok(report);
    }

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| pairs[i].id);
    let keys: Vec<String> = pairs
        .iter()
        .map(|p| cache_key(&p.question, &provider.model_name, &provider.prompt_version))
        .collect();
    let mut misses: Vec<(String, String)> = Vec::new();
    for &i in &order {
        if cache.get(&keys[i]).is_some() {
            report.cache_hits += 1;
        } else if !misses.iter().any(|(k, _)| *k == keys[i]) {
            misses.push((keys[i].clone(), pairs[i].question.clone()));
        }
    }

    let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(provider.concurrency)
        .build()
        .map_err(|e| ParaphraseError::Config(e.to_string()))?;
    let results: Vec<Result<String, FetchError>> = pool.install(|| {
        use rayon::prelude::*;
        misses
            .par_iter()
            .map(|(_, q)| fetch(provider, transport, api_key.as_deref(), q))
            .collect()
    });
    for ((key, question), result) in misses.into_iter().zip(results) {
        match result {
            Ok(text) => {
                report.fetched += 1;
                cache.insert(key, text)?;
            }
            Err(e) => {
                report.failed += 1;
                log::warn!("keeping template question `{question}`: {e}");
            }
        }
    }

    for &i in &order {
        let p = &mut pairs[i];
        p.paraphrased = false;
        let Some(text) = cache.get(&keys[i]) else {
            continue;
        };
        if guard(p, text) {
            p.question = text.trim().to_string();
            p.paraphrased = true;
            report.accepted += 1;
        } else {
            report.rejected_by_guard += 1;
            log::warn!(
                "paraphrase of pair {} dropped a surface form; kept the template",
                p.id
            );
        }
    }
    Ok(report)
}
