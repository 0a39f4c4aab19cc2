//! Completion gateway: one `complete` call over any provider, with a
//! content-addressed disk cache, bounded retries and a call counter.

mod cache;
#[cfg(feature = "http")]
mod http;
mod mock;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use cache::{CacheEntry, DiskCache};
#[cfg(feature = "http")]
pub use http::{HttpChatProvider, API_KEY_ENV};
pub use mock::MockProvider;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model_id: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_output_chars_hint: usize,
    pub stop_sequences: Vec<String>,
}

impl LlmRequest {
    /// Greedy decoding, no stop sequences.
    pub fn new(model_id: impl Into<String>, prompt: impl Into<String>) -> Self {
        LlmRequest {
            model_id: model_id.into(),
            prompt: prompt.into(),
            temperature: 0.0,
            max_output_chars_hint: 0,
            stop_sequences: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.prompt.is_empty() {
            return Err(Error::InvalidArgument("empty prompt".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidArgument("temperature must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub from_cache: bool,
    pub latency_ms: u64,
    pub provider: String,
}

/// A failed provider call. Transient failures (rate limits, server errors,
/// transport errors) are retried by the gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderFailure {
    pub status: Option<u16>,
    pub message: String,
    pub transient: bool,
}

impl ProviderFailure {
    pub fn transient(status: Option<u16>, message: impl Into<String>) -> Self {
        ProviderFailure {
            status,
            message: message.into(),
            transient: true,
        }
    }

    pub fn permanent(status: Option<u16>, message: impl Into<String>) -> Self {
        ProviderFailure {
            status,
            message: message.into(),
            transient: false,
        }
    }

    /// HTTP 429 and 5xx are worth retrying.
    pub fn from_status(status: u16, message: impl Into<String>) -> Self {
        if status == 429 || (500..600).contains(&status) {
            Self::transient(Some(status), message)
        } else {
            Self::permanent(Some(status), message)
        }
    }
}

pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &LlmRequest) -> std::result::Result<String, ProviderFailure>;
}

/// SHA-256 over the provider name and every request field that can change
/// the output. Each field is length-prefixed so concatenations cannot
/// collide.
pub fn cache_key(provider: &str, request: &LlmRequest) -> String {
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(b"tripleforge-llm-cache-v1");
    field(provider.as_bytes());
    field(request.model_id.as_bytes());
    field(request.prompt.as_bytes());
    // -0.0 and 0.0 decode identically
    let temperature = if request.temperature == 0.0 {
        0.0f64
    } else {
        request.temperature
    };
    field(&temperature.to_le_bytes());
    field(&(request.stop_sequences.len() as u64).to_le_bytes());
    for s in &request.stop_sequences {
        field(s.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Total attempts including the first.
    pub max_attempts: usize,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): base · 2^(retry−1), capped.
    pub fn delay(&self, retry: usize) -> Duration {
        let factor = 1u64
            .checked_shl(retry.saturating_sub(1).min(32) as u32)
            .unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

pub struct Gateway {
    provider: Box<dyn CompletionProvider>,
    cache: Option<DiskCache>,
    retry: RetryPolicy,
    max_in_flight: usize,
    provider_calls: AtomicUsize,
}

impl Gateway {
    pub fn new(provider: Box<dyn CompletionProvider>) -> Self {
        Gateway {
            provider,
            cache: None,
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            provider_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(mut self, cache: DiskCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_in_flight(mut self, n: usize) -> Self {
        self.max_in_flight = n.max(1);
        self
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    /// Number of calls that reached the provider (cache hits excluded).
    pub fn provider_calls(&self) -> usize {
        self.provider_calls.load(Ordering::SeqCst)
    }

    pub fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        request.validate()?;
        let provider = self.provider.name().to_string();
        let key = cache_key(&provider, request);
        if let Some(text) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(LlmResponse {
                text,
                from_cache: true,
                latency_ms: 0,
                provider,
            });
        }
        let started = Instant::now();
        let attempts = self.retry.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            self.provider_calls.fetch_add(1, Ordering::SeqCst);
            match self.provider.complete(request) {
                Ok(text) => {
                    if let Some(cache) = &self.cache {
                        cache.put(&CacheEntry {
                            key: key.clone(),
                            provider: provider.clone(),
                            model_id: request.model_id.clone(),
                            text: text.clone(),
                        })?;
                    }
                    return Ok(LlmResponse {
                        text,
                        from_cache: false,
                        latency_ms: started.elapsed().as_millis() as u64,
                        provider,
                    });
                }
                Err(f) if f.transient && attempt < attempts => {
                    std::thread::sleep(self.retry.delay(attempt));
                }
                Err(f) => {
                    return Err(Error::Provider {
                        attempts: attempt,
                        status: f.status,
                        message: f.message,
                    })
                }
            }
        }
    }

    /// Completes every request with at most `max_in_flight` concurrent calls.
    /// Results keep the input order.
    pub fn complete_all(&self, requests: &[LlmRequest]) -> Vec<Result<LlmResponse>> {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<LlmResponse>>>> = Mutex::new((0..requests.len()).map(|_| None).collect());
        let workers = self.max_in_flight.min(requests.len()).max(1);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= requests.len() {
                        break;
                    }
                    let r = self.complete(&requests[i]);
                    slots.lock().expect("result slots poisoned")[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("result slots poisoned")
            .into_iter()
            .map(|r| r.expect("every request completed"))
            .collect()
    }
}
