//! Masked language model completion contract.
//!
//! A backend answers one question: for a masked pattern, what are the
//! `top_q` most probable single-unit completions, and where do a handful of
//! terms of interest rank? Ranks are 1-based, log-probabilities are natural
//! logs of a softmax over the full vocabulary, and equal log-probabilities
//! are ordered by term string.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::MaskedPattern;

mod cache;
mod client;
pub mod conformance;
mod mock;
pub mod wire;
pub mod server;

pub use cache::CachedBackend;
pub use client::{ClientConfig, HttpBackend};
pub use mock::{CategorySpec, MockLm, TemplateSpec, WorldError, WorldSpec, SLOT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlmError {
    #[error("backend transport error: {detail}")]
    Transport { detail: String, retryable: bool },
    #[error("backend overloaded")]
    Overloaded,
    #[error("pattern has {len} tokens, backend context limit is {limit}")]
    ContextTooLong { len: usize, limit: usize },
    #[error("invalid request ({code}): {detail}")]
    InvalidRequest { code: String, detail: String },
    #[error("backend capability: {0}")]
    Capability(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

impl MlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, MlmError::Overloaded | MlmError::Transport { retryable: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub term: String,
    pub logprob: f64,
}

/// Ranked completions for one pattern, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub vocab_size: usize,
    pub entries: Vec<Completion>,
}

impl CompletionResult {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|c| c.term.as_str())
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.vocab_size
    }
}

/// The canonical completion order: log-probability descending, then term
/// ascending.
pub fn completion_order(a_term: &str, a_lp: f64, b_term: &str, b_lp: f64) -> Ordering {
    b_lp.total_cmp(&a_lp).then_with(|| a_term.cmp(b_term))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub logprob: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("term {0:?} is not in the model vocabulary")]
    OutOfVocabulary(String),
    #[error("term {0:?} was not among the requested terms of interest")]
    NotRequested(String),
}

/// Exact rank and log-probability for each requested term; `None` marks an
/// out-of-vocabulary term.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankLookup(BTreeMap<String, Option<RankEntry>>);

impl RankLookup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, term: impl Into<String>, entry: Option<RankEntry>) {
        self.0.insert(term.into(), entry);
    }

    pub fn get(&self, term: &str) -> Option<Option<RankEntry>> {
        self.0.get(term).copied()
    }

    pub fn rank_of(&self, term: &str) -> Result<usize, RankError> {
        match self.0.get(term) {
            Some(Some(e)) => Ok(e.rank),
            Some(None) => Err(RankError::OutOfVocabulary(term.to_owned())),
            None => Err(RankError::NotRequested(term.to_owned())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Option<RankEntry>)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// What `GET /v1/info` reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub model: String,
    pub vocab_size: usize,
    pub max_context: usize,
    /// Largest `top_q` the backend will serve; `None` means the full
    /// vocabulary may be requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_top_q: Option<usize>,
}

pub trait MlmBackend: Send + Sync {
    /// Stable identifier, used in cache keys.
    fn id(&self) -> &str;

    fn info(&self) -> Result<BackendInfo, MlmError>;

    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms_of_interest: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError>;

    fn contains(&self, term: &str) -> Result<bool, MlmError>;
}

impl<B: MlmBackend + ?Sized> MlmBackend for &B {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn info(&self) -> Result<BackendInfo, MlmError> {
        (**self).info()
    }
    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        (**self).complete(pattern, top_q, terms)
    }
    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        (**self).contains(term)
    }
}

impl<B: MlmBackend + ?Sized> MlmBackend for Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn info(&self) -> Result<BackendInfo, MlmError> {
        (**self).info()
    }
    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        (**self).complete(pattern, top_q, terms)
    }
    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        (**self).contains(term)
    }
}

impl<B: MlmBackend + ?Sized> MlmBackend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn info(&self) -> Result<BackendInfo, MlmError> {
        (**self).info()
    }
    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        (**self).complete(pattern, top_q, terms)
    }
    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        (**self).contains(term)
    }
}

/// Shared request validation for backends.
pub fn check_request(pattern: &MaskedPattern, top_q: usize, max_context: usize) -> Result<(), MlmError> {
    if top_q == 0 {
        return Err(MlmError::InvalidRequest {
            code: "invalid_top_q".into(),
            detail: "top_q must be at least 1".into(),
        });
    }
    if pattern.len() > max_context {
        return Err(MlmError::ContextTooLong { len: pattern.len(), limit: max_context });
    }
    Ok(())
}

/// Fetch the whole completion distribution for `pattern`.
///
/// Fails with [`MlmError::Capability`] when the backend caps `top_q` below
/// its vocabulary size.
pub fn full_distribution<B: MlmBackend + ?Sized>(
    backend: &B,
    pattern: &MaskedPattern,
) -> Result<CompletionResult, MlmError> {
    let info = backend.info()?;
    if let Some(cap) = info.max_top_q {
        if cap < info.vocab_size {
            return Err(MlmError::Capability(format!(
                "backend serves at most {cap} of {} completions; configure a fallback top_q \
                 to score with a floor log-probability for absent terms",
                info.vocab_size
            )));
        }
    }
    let (result, _) = backend.complete(pattern, info.vocab_size, &[])?;
    Ok(result)
}

/// Top-q completion terms, for similarity computations.
pub fn top_terms<B: MlmBackend + ?Sized>(
    backend: &B,
    pattern: &MaskedPattern,
    q: usize,
) -> Result<CompletionResult, MlmError> {
    backend.complete(pattern, q, &[]).map(|(r, _)| r)
}
