//! Masked patterns: token sequences with exactly one masked slot.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The mask symbol. The corpus tokenizer splits brackets into their own
/// tokens, so this string can never be produced by tokenizing text.
pub const MASK: &str = "[MASK]";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("mask index {index} out of range for {len} tokens")]
    MaskOutOfRange { index: usize, len: usize },
    #[error("token at mask index is {found:?}, expected {MASK}")]
    MissingMask { found: String },
    #[error("pattern contains {0} mask symbols, expected exactly one")]
    MultipleMasks(usize),
}

/// A sentence with a single masked location.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPattern")]
pub struct MaskedPattern {
    tokens: Vec<String>,
    mask_index: usize,
}

#[derive(Deserialize)]
struct RawPattern {
    tokens: Vec<String>,
    mask_index: usize,
}

impl TryFrom<RawPattern> for MaskedPattern {
    type Error = PatternError;

    fn try_from(raw: RawPattern) -> Result<Self, Self::Error> {
        MaskedPattern::new(raw.tokens, raw.mask_index)
    }
}

impl MaskedPattern {
    pub fn new(tokens: Vec<String>, mask_index: usize) -> Result<Self, PatternError> {
        let len = tokens.len();
        let found = tokens
            .get(mask_index)
            .ok_or(PatternError::MaskOutOfRange { index: mask_index, len })?;
        if found != MASK {
            return Err(PatternError::MissingMask { found: found.clone() });
        }
        let masks = tokens.iter().filter(|t| *t == MASK).count();
        if masks != 1 {
            return Err(PatternError::MultipleMasks(masks));
        }
        Ok(MaskedPattern { tokens, mask_index })
    }

    /// Replace `tokens[start..end]` with one mask symbol.
    ///
    /// The caller guarantees `start < end <= tokens.len()` and that no token
    /// is already a mask.
    pub(crate) fn from_span<S: AsRef<str>>(tokens: &[S], start: usize, end: usize) -> Self {
        debug_assert!(start < end && end <= tokens.len());
        let mut out = Vec::with_capacity(tokens.len() - (end - start) + 1);
        out.extend(tokens[..start].iter().map(|t| t.as_ref().to_owned()));
        out.push(MASK.to_owned());
        out.extend(tokens[end..].iter().map(|t| t.as_ref().to_owned()));
        MaskedPattern { tokens: out, mask_index: start }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn mask_index(&self) -> usize {
        self.mask_index
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// A pattern that is nothing but the mask carries no context.
    pub fn is_degenerate(&self) -> bool {
        self.tokens.len() == 1
    }

    /// Tokens other than the mask.
    pub fn context(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.mask_index)
            .map(|(_, t)| t.as_str())
    }

    /// Space-joined rendering, used for display and as a sort key.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }

    /// Put `fill` back in place of the mask.
    pub fn unmask<S: AsRef<str>>(&self, fill: &[S]) -> Vec<String> {
        let mut out = Vec::with_capacity(self.tokens.len() + fill.len());
        out.extend_from_slice(&self.tokens[..self.mask_index]);
        out.extend(fill.iter().map(|t| t.as_ref().to_owned()));
        out.extend_from_slice(&self.tokens[self.mask_index + 1..]);
        out
    }
}

impl fmt::Display for MaskedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}
