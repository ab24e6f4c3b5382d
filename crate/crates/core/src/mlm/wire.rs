//! JSON bodies of the fill-mask HTTP protocol.
//!
//! ```text
//! POST /v1/fill-mask          FillMaskRequest  -> FillMaskResponse
//! GET  /v1/vocab/contains?term=...             -> VocabContains
//! GET  /v1/info                                -> BackendInfo
//! ```
//!
//! Failures are reported as HTTP 400 with an [`ErrorBody`], or 503 when the
//! server is overloaded (clients retry with backoff).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Completion, CompletionResult, MlmError, RankEntry, RankLookup};

pub const FILL_MASK: &str = "/v1/fill-mask";
pub const VOCAB_CONTAINS: &str = "/v1/vocab/contains";
pub const INFO: &str = "/v1/info";

pub const CODE_BAD_REQUEST: &str = "bad_request";
pub const CODE_CONTEXT_TOO_LONG: &str = "context_too_long";
pub const CODE_CAPABILITY: &str = "capability";
pub const CODE_OVERLOADED: &str = "overloaded";
pub const CODE_NOT_FOUND: &str = "not_found";
pub const CODE_INTERNAL: &str = "internal";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillMaskRequest {
    pub tokens: Vec<String>,
    pub mask_index: usize,
    pub top_q: usize,
    #[serde(default)]
    pub terms_of_interest: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillMaskResponse {
    pub vocab_size: usize,
    pub top: Vec<Completion>,
    pub lookup: BTreeMap<String, Option<RankEntry>>,
}

impl FillMaskResponse {
    pub fn from_parts(result: CompletionResult, lookup: RankLookup) -> Self {
        FillMaskResponse {
            vocab_size: result.vocab_size,
            top: result.entries,
            lookup: lookup.iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        }
    }

    pub fn into_parts(self) -> (CompletionResult, RankLookup) {
        let mut lookup = RankLookup::new();
        for (k, v) in self.lookup {
            lookup.insert(k, v);
        }
        (CompletionResult { vocab_size: self.vocab_size, entries: self.top }, lookup)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabContains {
    pub in_vocab: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
    /// Context limit, present with `context_too_long`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
}

impl ErrorBody {
    pub fn new(code: &str, detail: impl Into<String>) -> Self {
        ErrorBody { error: code.to_owned(), detail: detail.into(), limit: None }
    }

    /// HTTP status and body for a backend error.
    pub fn from_error(err: &MlmError) -> (u16, Self) {
        match err {
            MlmError::ContextTooLong { limit, .. } => (
                400,
                ErrorBody { error: CODE_CONTEXT_TOO_LONG.into(), detail: err.to_string(), limit: Some(*limit) },
            ),
            MlmError::InvalidRequest { code, detail } => (400, ErrorBody::new(code, detail.clone())),
            MlmError::Capability(d) => (400, ErrorBody::new(CODE_CAPABILITY, d.clone())),
            MlmError::Overloaded => (503, ErrorBody::new(CODE_OVERLOADED, "server overloaded")),
            MlmError::Transport { detail, .. } => (502, ErrorBody::new(CODE_INTERNAL, detail.clone())),
            MlmError::Protocol(d) => (500, ErrorBody::new(CODE_INTERNAL, d.clone())),
        }
    }

    /// Client-side mapping back to a backend error.
    pub fn into_error(self, pattern_len: usize) -> MlmError {
        match self.error.as_str() {
            CODE_CONTEXT_TOO_LONG => MlmError::ContextTooLong { len: pattern_len, limit: self.limit.unwrap_or(0) },
            CODE_CAPABILITY => MlmError::Capability(self.detail),
            CODE_OVERLOADED => MlmError::Overloaded,
            _ => MlmError::InvalidRequest { code: self.error, detail: self.detail },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_shape() {
        let mut lookup = RankLookup::new();
        lookup.insert("paris", Some(RankEntry { rank: 1, logprob: -0.25 }));
        lookup.insert("new york", None);
        let result = CompletionResult {
            vocab_size: 3,
            entries: vec![Completion { term: "paris".into(), logprob: -0.25 }],
        };
        let body = FillMaskResponse::from_parts(result.clone(), lookup.clone());
        assert_eq!(
            serde_json::to_string(&body).unwrap(),
            r#"{"vocab_size":3,"top":[{"term":"paris","logprob":-0.25}],"lookup":{"new york":null,"paris":{"rank":1,"logprob":-0.25}}}"#
        );
        assert_eq!(body.into_parts(), (result, lookup));
    }

    #[test]
    fn error_codes_roundtrip() {
        for err in [
            MlmError::ContextTooLong { len: 9, limit: 8 },
            MlmError::Capability("x".into()),
            MlmError::InvalidRequest { code: "invalid_top_q".into(), detail: "d".into() },
        ] {
            let (status, body) = ErrorBody::from_error(&err);
            assert_eq!(status, 400);
            assert_eq!(body.into_error(9), err);
        }
        assert_eq!(ErrorBody::from_error(&MlmError::Overloaded).0, 503);
    }
}
