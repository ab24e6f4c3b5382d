//! Sentence corpus ingestion and occurrence lookup.
//!
//! Each input line is one sentence. Lines are tokenized into lowercased word
//! tokens (maximal alphanumeric runs) and punctuation tokens (one per
//! character); whitespace only separates. The index keeps a positional
//! posting list per token, which is enough to find contiguous multi-word
//! terms.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::MaskedPattern;

const INDEX_MAGIC: &str = "termset-corpus-index";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus at line {line}: {source}")]
    Ingest { line: usize, source: io::Error },
    #[error("corpus contains no sentences")]
    Empty,
    #[error("term {0:?} is empty after normalization")]
    EmptyTerm(String),
    #[error("invalid occurrence: sentence {sentence}, span [{start}, {end})")]
    InvalidOccurrence { sentence: usize, start: usize, end: usize },
    #[error("malformed index file at line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { lowercase: true }
    }
}

/// A token with its byte range in the raw sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(text: &str, config: TokenizerConfig) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    let push = |tokens: &mut Vec<Token>, start: usize, end: usize| {
        let slice = &text[start..end];
        let text = if config.lowercase { slice.to_lowercase() } else { slice.to_owned() };
        tokens.push(Token { text, start, end });
    };
    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            word_start.get_or_insert(i);
            continue;
        }
        if let Some(start) = word_start.take() {
            push(&mut tokens, start, i);
        }
        if !ch.is_whitespace() {
            push(&mut tokens, i, i + ch.len_utf8());
        }
    }
    if let Some(start) = word_start {
        push(&mut tokens, start, text.len());
    }
    tokens
}

/// Token texts only.
pub fn tokenize_words(text: &str, config: TokenizerConfig) -> Vec<String> {
    tokenize(text, config).into_iter().map(|t| t.text).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: usize,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting {
    pub sentence: u32,
    pub position: u32,
}

/// One occurrence of a term: a contiguous token span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct IngestStats {
    pub lines: usize,
    pub skipped_blank: usize,
    pub tokens: usize,
}

/// Immutable positional index over a sentence corpus.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    config: TokenizerConfig,
    sentences: Vec<Sentence>,
    postings: HashMap<String, Vec<Posting>>,
    stats: IngestStats,
}

impl CorpusIndex {
    /// Build an index from a line source. Blank lines are skipped, so
    /// sentence ids stay dense.
    pub fn build<R: BufRead>(source: R, config: TokenizerConfig) -> Result<Self, CorpusError> {
        let mut raws = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.map_err(|source| CorpusError::Ingest { line: i + 1, source })?;
            raws.push(line);
        }
        Self::from_sentences(raws, config)
    }

    pub fn from_sentences<I, S>(lines: I, config: TokenizerConfig) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut stats = IngestStats::default();
        let mut sentences = Vec::new();
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        for raw in lines {
            let raw = raw.into();
            stats.lines += 1;
            let tokens = tokenize(&raw, config);
            if tokens.is_empty() {
                stats.skipped_blank += 1;
                continue;
            }
            let id = sentences.len();
            for (pos, tok) in tokens.iter().enumerate() {
                postings
                    .entry(tok.text.clone())
                    .or_default()
                    .push(Posting { sentence: id as u32, position: pos as u32 });
            }
            stats.tokens += tokens.len();
            sentences.push(Sentence { id, raw, tokens });
        }
        if sentences.is_empty() {
            return Err(CorpusError::Empty);
        }
        log::debug!(
            "indexed {} sentences, {} tokens, {} distinct",
            sentences.len(),
            stats.tokens,
            postings.len()
        );
        Ok(CorpusIndex { config, sentences, postings, stats })
    }

    pub fn config(&self) -> TokenizerConfig {
        self.config
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn token_count(&self) -> usize {
        self.stats.tokens
    }

    /// Number of distinct tokens, i.e. posting lists.
    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    pub fn sentence(&self, id: usize) -> Option<&Sentence> {
        self.sentences.get(id)
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of sentences containing `token`.
    pub fn document_frequency(&self, token: &str) -> usize {
        let list = self.postings(token);
        let mut n = 0;
        let mut last = None;
        for p in list {
            if last != Some(p.sentence) {
                n += 1;
                last = Some(p.sentence);
            }
        }
        n
    }

    pub fn tokenize_term(&self, term: &str) -> Vec<String> {
        tokenize_words(term, self.config)
    }

    /// Up to `max_n` occurrences of `term` in (sentence, position) order.
    ///
    /// Multi-word terms match contiguous token runs. The rarest token of the
    /// term anchors the search; every anchor hit is then verified in place.
    pub fn find_occurrences(&self, term: &str, max_n: usize) -> Result<Vec<Occurrence>, CorpusError> {
        let words = self.tokenize_term(term);
        if words.is_empty() {
            return Err(CorpusError::EmptyTerm(term.to_owned()));
        }
        let (anchor_offset, anchor) = words
            .iter()
            .enumerate()
            .min_by_key(|(i, w)| (self.postings(w).len(), *i))
            .expect("non-empty");
        let mut out = Vec::new();
        for p in self.postings(anchor) {
            if out.len() >= max_n {
                break;
            }
            let pos = p.position as usize;
            let Some(start) = pos.checked_sub(anchor_offset) else { continue };
            let sentence = &self.sentences[p.sentence as usize];
            let end = start + words.len();
            if end > sentence.tokens.len() {
                continue;
            }
            let hit = sentence.tokens[start..end]
                .iter()
                .zip(&words)
                .all(|(tok, w)| tok.text == *w);
            if hit {
                out.push(Occurrence { sentence: p.sentence as usize, start, end });
            }
        }
        Ok(out)
    }

    /// Mask the span of `occ` in its sentence.
    pub fn mask_occurrence(&self, occ: &Occurrence) -> Result<MaskedPattern, CorpusError> {
        let invalid = || CorpusError::InvalidOccurrence {
            sentence: occ.sentence,
            start: occ.start,
            end: occ.end,
        };
        let sentence = self.sentences.get(occ.sentence).ok_or_else(invalid)?;
        if occ.start >= occ.end || occ.end > sentence.tokens.len() {
            return Err(invalid());
        }
        let words: Vec<&str> = sentence.words().collect();
        Ok(MaskedPattern::from_span(&words, occ.start, occ.end))
    }

    /// Write the index. The file holds a version header, the tokenizer
    /// settings, any caller-supplied metadata lines and the raw sentences
    /// (JSON-escaped, one per line); loading re-derives the postings.
    pub fn save<W: Write>(&self, mut w: W, metadata: &BTreeMap<String, String>) -> Result<(), CorpusError> {
        writeln!(w, "{INDEX_MAGIC} {INDEX_VERSION}")?;
        writeln!(w, "lowercase={}", self.config.lowercase)?;
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "sentences={}", self.sentences.len())?;
        for s in &self.sentences {
            let line = serde_json::to_string(&s.raw).map_err(io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self, CorpusError> {
        let fmt = |line: usize, detail: &str| CorpusError::Format { line, detail: detail.to_owned() };
        let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| -> Result<(usize, String), CorpusError> {
            match lines.next() {
                Some((n, Ok(l))) => Ok((n, l)),
                Some((n, Err(e))) => Err(CorpusError::Ingest { line: n, source: e }),
                None => Err(fmt(0, &format!("unexpected end of file, expected {what}"))),
            }
        };
        let (n, header) = next("header")?;
        if header != format!("{INDEX_MAGIC} {INDEX_VERSION}") {
            return Err(fmt(n, "unrecognized header"));
        }
        let (n, lc) = next("tokenizer settings")?;
        let lowercase = match lc.as_str() {
            "lowercase=true" => true,
            "lowercase=false" => false,
            _ => return Err(fmt(n, "expected lowercase=true|false")),
        };
        let (mut n, mut line) = next("sentence count")?;
        while line.starts_with("# ") {
            (n, line) = next("sentence count")?;
        }
        let count: usize = line
            .strip_prefix("sentences=")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| fmt(n, "expected sentences=<count>"))?;
        let mut raws = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, l) = next("sentence")?;
            let raw: String = serde_json::from_str(&l).map_err(|e| fmt(n, &e.to_string()))?;
            raws.push(raw);
        }
        let index = Self::from_sentences(raws, TokenizerConfig { lowercase })?;
        if index.sentence_count() != count {
            return Err(fmt(0, "sentence count mismatch after rebuild"));
        }
        Ok(index)
    }
}
