use std::thread;
use std::time::Duration;

use parking_lot::{Condvar, Mutex};
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::{self, ErrorBody, FillMaskRequest, FillMaskResponse, VocabContains};
use super::{BackendInfo, CompletionResult, MlmBackend, MlmError, RankLookup};
use crate::pattern::MaskedPattern;

#[derive(Debug, Clone)]
pub struct ClientConfig {
    /// Concurrent in-flight requests allowed across threads.
    pub max_in_flight: usize,
    /// Retries after a 503 or a connection failure.
    pub max_retries: u32,
    /// First backoff delay; doubles on each retry.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            max_in_flight: 8,
            max_retries: 4,
            backoff: Duration::from_millis(50),
            timeout: Duration::from_secs(120),
        }
    }
}

struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock();
        while *free == 0 {
            self.cv.wait(&mut free);
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock() += 1;
        self.0.cv.notify_one();
    }
}

/// Backend speaking the fill-mask HTTP protocol.
pub struct HttpBackend {
    base: String,
    id: String,
    info: BackendInfo,
    agent: ureq::Agent,
    config: ClientConfig,
    permits: Permits,
}

enum Outcome<T> {
    Done(T),
    Retry(MlmError),
}

impl HttpBackend {
    /// Connect and fetch `/v1/info`.
    pub fn connect(base_url: &str, config: ClientConfig) -> Result<Self, MlmError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        let mut backend = HttpBackend {
            base: base_url.trim_end_matches('/').to_owned(),
            id: String::new(),
            info: BackendInfo { model: String::new(), vocab_size: 0, max_context: 0, max_top_q: None },
            agent,
            permits: Permits { free: Mutex::new(config.max_in_flight.max(1)), cv: Condvar::new() },
            config,
        };
        let info: BackendInfo = backend.request(0, |agent, url| agent.get(format!("{url}{}", wire::INFO)).call())?;
        backend.id = format!("http:{}", info.model);
        backend.info = info;
        Ok(backend)
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request<T, F>(&self, pattern_len: usize, send: F) -> Result<T, MlmError>
    where
        T: DeserializeOwned,
        F: Fn(&ureq::Agent, &str) -> Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    {
        let _permit = self.permits.acquire();
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            let outcome = match send(&self.agent, &self.base) {
                Ok(resp) => Self::decode(resp, pattern_len)?,
                Err(e) => Outcome::Retry(MlmError::Transport { detail: e.to_string(), retryable: true }),
            };
            match outcome {
                Outcome::Done(v) => return Ok(v),
                Outcome::Retry(err) if attempt < self.config.max_retries => {
                    log::debug!("retrying after {err} (attempt {})", attempt + 1);
                    thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Outcome::Retry(err) => return Err(err),
            }
        }
    }

    fn decode<T: DeserializeOwned>(
        mut resp: ureq::http::Response<ureq::Body>,
        pattern_len: usize,
    ) -> Result<Outcome<T>, MlmError> {
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| MlmError::Transport { detail: e.to_string(), retryable: true })?;
        match status {
            200 => serde_json::from_str(&body)
                .map(Outcome::Done)
                .map_err(|e| MlmError::Protocol(format!("undecodable response: {e}"))),
            503 => Ok(Outcome::Retry(MlmError::Overloaded)),
            400 => {
                let err: ErrorBody = serde_json::from_str(&body)
                    .map_err(|e| MlmError::Protocol(format!("undecodable error body: {e}")))?;
                Err(err.into_error(pattern_len))
            }
            other => Err(MlmError::Transport { detail: format!("HTTP {other}: {body}"), retryable: false }),
        }
    }

    fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B, pattern_len: usize) -> Result<T, MlmError> {
        self.request(pattern_len, |agent, base| agent.post(format!("{base}{path}")).send_json(body))
    }
}

impl MlmBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn info(&self) -> Result<BackendInfo, MlmError> {
        Ok(self.info.clone())
    }

    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms_of_interest: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        let req = FillMaskRequest {
            tokens: pattern.tokens().to_vec(),
            mask_index: pattern.mask_index(),
            top_q,
            terms_of_interest: terms_of_interest.to_vec(),
        };
        let resp: FillMaskResponse = self.post(wire::FILL_MASK, &req, pattern.len())?;
        Ok(resp.into_parts())
    }

    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        let resp: VocabContains = self.request(0, |agent, base| {
            agent.get(format!("{base}{}", wire::VOCAB_CONTAINS)).query("term", term).call()
        })?;
        Ok(resp.in_vocab)
    }
}
