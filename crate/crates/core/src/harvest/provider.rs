//! Similarity providers: an OpenAI-compatible HTTP client and an offline mock.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use reqwest::Url;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_API_KEY_ENV: &str = "ODORMAP_API_KEY";

/// One pairwise query. `item_a < item_b` lexicographically.
#[derive(Debug, Clone, Copy)]
pub struct PairRequest<'a> {
    pub item_a: &'a str,
    pub item_b: &'a str,
    pub prompt: &'a str,
}

/// Anything that answers a rendered pairwise prompt with raw response text.
pub trait SimilarityProvider: Sync {
    /// Model identifier; part of the cache key.
    fn model_name(&self) -> &str;

    /// Returns the raw response text. Errors are treated as transient and
    /// retried by the harvester.
    fn complete(&self, request: &PairRequest<'_>) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token; empty for none.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_parallel: usize,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl ProviderConfig {
    pub fn new(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        ProviderConfig {
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            temperature: 0.0,
            max_parallel: 4,
            timeout_secs: 60,
            max_retries: 3,
        }
    }

    pub fn validate(&self) -> Result<Url> {
        let url = Url::parse(&self.endpoint_url)
            .map_err(|e| Error::Config(format!("endpoint {:?}: {e}", self.endpoint_url)))?;
        if self.model_name.trim().is_empty() {
            return Err(Error::Config("empty model name".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::Config(format!("temperature {} < 0", self.temperature)));
        }
        if self.max_parallel == 0 {
            return Err(Error::Config("max_parallel must be >= 1".into()));
        }
        Ok(url)
    }
}

/// Blocking client for `POST {endpoint}` chat-completions requests.
pub struct HttpProvider {
    config: ProviderConfig,
    url: Url,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let url = config.validate()?;
        let api_key = if config.api_key_env.is_empty() {
            None
        } else {
            let key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
            if key.is_none() {
                log::debug!("{} not set; sending requests without a bearer token", config.api_key_env);
            }
            key
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Provider(e.to_string()))?;
        Ok(HttpProvider {
            config,
            url,
            api_key,
            client,
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl SimilarityProvider for HttpProvider {
    fn model_name(&self) -> &str {
        &self.config.model_name
    }

    fn complete(&self, request: &PairRequest<'_>) -> Result<String> {
        let body = json!({
            "model": self.config.model_name,
            "messages": [{ "role": "user", "content": request.prompt }],
            "temperature": self.config.temperature,
        });
        let mut builder = self.client.post(self.url.clone()).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| Error::Provider(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            return Err(Error::Provider(format!("HTTP {status}: {}", truncate(&text, 200))));
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| Error::Provider(format!("malformed response body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Error::Provider("response has no message content".into()))
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Deterministic offline provider.
///
/// The similarity is `0.75 · dice + 0.25 · jitter`, where `dice` is the
/// character-bigram Dice coefficient of the lowercased labels and `jitter`
/// is a seeded hash of the unordered pair in `[0, 1)`. Identical labels
/// score exactly 1.
#[derive(Debug)]
pub struct MockProvider {
    seed: u64,
    model_name: String,
    calls: AtomicUsize,
}

pub fn mock_provider(seed: u64) -> MockProvider {
    MockProvider::new(seed)
}

impl MockProvider {
    pub fn new(seed: u64) -> Self {
        MockProvider {
            seed,
            model_name: format!("mock-{seed}"),
            calls: AtomicUsize::new(0),
        }
    }

    /// Number of `complete` calls served so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(lo.as_bytes());
        hasher.update([0u8]);
        hasher.update(hi.as_bytes());
        let digest = hasher.finalize();
        let word = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let jitter = (word >> 11) as f64 / (1u64 << 53) as f64;
        0.75 * bigram_dice(lo, hi) + 0.25 * jitter
    }
}

impl SimilarityProvider for MockProvider {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn complete(&self, request: &PairRequest<'_>) -> Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(format!("{}", self.similarity(request.item_a, request.item_b)))
    }
}

fn bigrams(s: &str) -> Vec<(char, char)> {
    let chars: Vec<char> = s.to_lowercase().chars().collect();
    let mut grams: Vec<_> = chars.windows(2).map(|w| (w[0], w[1])).collect();
    grams.sort_unstable();
    grams
}

/// Multiset Dice coefficient over character bigrams.
fn bigram_dice(a: &str, b: &str) -> f64 {
    let (x, y) = (bigrams(a), bigrams(b));
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    2.0 * shared as f64 / (x.len() + y.len()) as f64
}
