//! Client for an external HTTP machine-translation service.
//!
//! Wire format (DeepL-compatible): `POST <endpoint>` with a JSON body
//! `{"text": [...], "source_lang": "DE", "target_lang": "EN"}`, answered by
//! `{"translations": [{"text": "..."}, ...]}`. Requests are rate limited
//! client-side and retried with exponential backoff on transport errors,
//! HTTP 429 and 5xx.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::TranslationBackend;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    pub id: String,
    pub endpoint: String,
    /// Environment variable holding the auth token, if the service needs one.
    pub token_env: Option<String>,
    /// Authorization scheme placed before the token.
    pub auth_scheme: String,
    pub batch_size: usize,
    pub requests_per_second: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    pub timeout_secs: u64,
    /// Supported `(source, target)` pairs; empty means any pair.
    pub language_pairs: Vec<(String, String)>,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        HttpBackendConfig {
            id: "http".into(),
            endpoint: String::new(),
            token_env: None,
            auth_scheme: "DeepL-Auth-Key".into(),
            batch_size: 50,
            requests_per_second: 1.0,
            max_retries: 3,
            retry_backoff_ms: 500,
            timeout_secs: 30,
            language_pairs: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    text: &'a [String],
    source_lang: String,
    target_lang: String,
}

#[derive(Deserialize)]
struct Response {
    translations: Vec<Translated>,
}

#[derive(Deserialize)]
struct Translated {
    text: String,
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    token: Option<String>,
    agent: ureq::Agent,
    next_slot: Mutex<Option<Instant>>,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("config", &self.config)
            .field("token", &self.token.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

enum Attempt {
    Done(Vec<String>),
    Retry(String),
    Fail(String),
}

impl HttpBackend {
    /// Builds the client; the token is read from the configured environment
    /// variable.
    pub fn new(config: HttpBackendConfig) -> Result<Self> {
        if config.endpoint.is_empty() {
            return Err(Error::Config(format!("backend `{}` has no endpoint", config.id)));
        }
        if config.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !config.requests_per_second.is_finite() || config.requests_per_second <= 0.0 {
            return Err(Error::Config("requests_per_second must be positive".into()));
        }
        let token = match &config.token_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                Error::Config(format!("environment variable `{var}` with the MT token is not set"))
            })?),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend {
            config,
            token,
            agent,
            next_slot: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &HttpBackendConfig {
        &self.config
    }

    fn wait_for_slot(&self) {
        let interval = Duration::from_secs_f64(1.0 / self.config.requests_per_second);
        let mut slot = self.next_slot.lock().expect("rate limiter lock");
        let now = Instant::now();
        if let Some(at) = *slot {
            if at > now {
                thread::sleep(at - now);
            }
        }
        *slot = Some(Instant::now() + interval);
    }

    fn attempt(&self, texts: &[String], source: &str, target: &str) -> Attempt {
        self.wait_for_slot();
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("{} {token}", self.config.auth_scheme));
        }
        let body = Request {
            text: texts,
            source_lang: source.to_uppercase(),
            target_lang: target.to_uppercase(),
        };
        let mut resp = match req.send_json(&body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(format!("transport error: {e}")),
        };
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Attempt::Retry(format!("service answered HTTP {status}"));
        }
        if status >= 400 {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            return Attempt::Fail(format!("service rejected request with HTTP {status}: {detail}"));
        }
        match resp.body_mut().read_json::<Response>() {
            Ok(r) if r.translations.len() == texts.len() => {
                Attempt::Done(r.translations.into_iter().map(|t| t.text).collect())
            }
            Ok(r) => Attempt::Fail(format!(
                "service returned {} translations for {} texts",
                r.translations.len(),
                texts.len()
            )),
            Err(e) => Attempt::Fail(format!("malformed service response: {e}")),
        }
    }

    fn translate_chunk(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>> {
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let backoff = self.config.retry_backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                thread::sleep(Duration::from_millis(backoff));
            }
            match self.attempt(texts, source, target) {
                Attempt::Done(out) => return Ok(out),
                Attempt::Retry(msg) => {
                    log::debug!("backend `{}` attempt {attempt}: {msg}", self.config.id);
                    last = msg;
                }
                Attempt::Fail(msg) => {
                    return Err(Error::Translation {
                        message: msg,
                        retryable: false,
                        location: None,
                    })
                }
            }
        }
        Err(Error::Translation {
            message: format!(
                "giving up after {} retries: {last}",
                self.config.max_retries
            ),
            retryable: true,
            location: None,
        })
    }
}

impl TranslationBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn supports(&self, source: &str, target: &str) -> bool {
        self.config.language_pairs.is_empty()
            || self
                .config
                .language_pairs
                .iter()
                .any(|(s, t)| s == source && t == target)
    }

    fn translate_batch(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.config.batch_size) {
            out.extend(self.translate_chunk(chunk, source, target)?);
        }
        Ok(out)
    }
}
