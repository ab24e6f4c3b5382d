//! Ranked expansion output shared by every expander.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Product of experts over LM completions of the indicative patterns.
    Mpb1,
    /// MPB1 over the first collected patterns, unscored and unweighted.
    Bb,
    /// Pattern-similarity scoring of distributional candidates.
    Mpb2,
    /// MPB2 with the gold terms added to the candidate list.
    Mpb2o,
    /// Embedding-neighbour baseline.
    S2v,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Mpb1, Method::Bb, Method::Mpb2, Method::Mpb2o, Method::S2v];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mpb1 => "mpb1",
            Method::Bb => "bb",
            Method::Mpb2 => "mpb2",
            Method::Mpb2o => "mpb2o",
            Method::S2v => "s2v",
        }
    }

    pub fn uses_lm(self) -> bool {
        self != Method::S2v
    }

    pub fn uses_similarity(self) -> bool {
        matches!(self, Method::Mpb2 | Method::Mpb2o)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown method {0:?}; expected one of mpb1, bb, mpb2, mpb2o, s2v")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMethod(s.to_owned()))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTerm {
    pub term: String,
    pub score: f64,
}

/// A ranked list of distinct terms, best first. Equal scores are ordered by
/// term string.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub method: Method,
    pub entries: Vec<ScoredTerm>,
    /// Method-specific diagnostics (counts of floored terms, skipped
    /// candidates, and so on).
    pub meta: BTreeMap<String, Value>,
    /// Resolved run configuration, filled in by callers that persist output.
    pub config: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    method: Method,
    config: BTreeMap<String, String>,
    meta: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    rank: usize,
    term: String,
    score: f64,
}

impl Expansion {
    /// Sort, deduplicate (keeping each term's best score) and truncate.
    pub fn ranked(method: Method, scores: impl IntoIterator<Item = (String, f64)>, top_n: usize) -> Self {
        let mut all: Vec<ScoredTerm> = scores.into_iter().map(|(term, score)| ScoredTerm { term, score }).collect();
        all.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
        let mut seen = HashSet::new();
        all.retain(|e| seen.insert(e.term.clone()));
        all.truncate(top_n);
        Expansion { method, entries: all, meta: BTreeMap::new(), config: BTreeMap::new() }
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.term.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_owned(), value.into());
        self
    }

    /// One header line (method, config, meta), then one
    /// `{"rank","term","score"}` line per entry.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header = Header { method: self.method, config: self.config.clone(), meta: self.meta.clone() };
        serde_json::to_writer(&mut w, &header).map_err(io::Error::other)?;
        w.write_all(b"\n")?;
        for (i, e) in self.entries.iter().enumerate() {
            let row = Row { rank: i + 1, term: e.term.clone(), score: e.score };
            serde_json::to_writer(&mut w, &row).map_err(io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> io::Result<Self> {
        let mut lines = r.lines();
        let header: Header = match lines.next() {
            Some(l) => serde_json::from_str(&l?).map_err(io::Error::other)?,
            None => return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "empty expansion file")),
        };
        let mut entries = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(io::Error::other)?;
            entries.push(ScoredTerm { term: row.term, score: row.score });
        }
        Ok(Expansion { method: header.method, entries, meta: header.meta, config: header.config })
    }
}
