use std::fmt;

use serde::{Deserialize, Serialize};

/// A surface term, normalized to lowercase with whitespace runs collapsed to
/// a single space. Terms may span several words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Term(String);

impl Term {
    pub fn new(raw: &str) -> Self {
        Term(normalize(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_multi_word(&self) -> bool {
        self.0.contains(' ')
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

/// Lowercase and collapse whitespace.
pub fn normalize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

impl From<String> for Term {
    fn from(s: String) -> Self {
        Term::new(&s)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::new(s)
    }
}

impl From<Term> for String {
    fn from(t: Term) -> Self {
        t.0
    }
}

impl AsRef<str> for Term {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
