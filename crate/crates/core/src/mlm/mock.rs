//! Deterministic, fully enumerable stand-in for a masked language model.
//!
//! A world lists context templates (text with one `{}` slot) and, for each,
//! occurrence weights of terms in that slot. The completion distribution for
//! a pattern that matches a template token-for-token is
//!
//! ```text
//! p(t | template) = (w(template, t) + alpha) / (sum_u w(template, u) + alpha * |V|)
//! ```
//!
//! over the vocabulary `V`. Patterns that match no template get the uniform
//! distribution. The vocabulary is every single-token term named anywhere in
//! the world; multi-word terms are out of vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_request, completion_order, BackendInfo, Completion, CompletionResult, MlmBackend, MlmError, RankEntry, RankLookup};
use crate::corpus::{tokenize_words, TokenizerConfig};
use crate::pattern::{MaskedPattern, MASK};
use crate::term::normalize;

pub const SLOT: &str = "{}";

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("category {0:?} has no members")]
    EmptyCategory(String),
    #[error("world vocabulary is empty")]
    EmptyVocabulary,
    #[error("template {0:?} must contain exactly one {SLOT} slot")]
    BadTemplate(String),
    #[error("template {template:?}: weight for {term:?} must be finite and non-negative")]
    BadWeight { template: String, term: String },
    #[error("smoothing must be positive and finite, got {0}")]
    BadSmoothing(f64),
    #[error("cannot read world file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse world file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub text: String,
    pub weights: BTreeMap<String, f64>,
}

impl TemplateSpec {
    /// Template text with the slot replaced by `term`.
    pub fn fill(&self, term: &str) -> String {
        self.text.replacen(SLOT, term, 1)
    }
}

fn default_smoothing() -> f64 {
    0.01
}

fn default_max_context() -> usize {
    512
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub id: String,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default = "default_max_context")]
    pub max_context: usize,
    #[serde(default)]
    pub categories: Vec<CategorySpec>,
    #[serde(default)]
    pub extra_terms: Vec<String>,
    pub templates: Vec<TemplateSpec>,
}

impl WorldSpec {
    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world spec serializes")
    }
}

#[derive(Debug, Clone)]
struct Distribution {
    /// Vocabulary ids in completion order.
    order: Vec<u32>,
    /// Indexed by vocabulary id.
    logprob: Vec<f64>,
    /// 1-based, indexed by vocabulary id.
    rank: Vec<u32>,
}

impl Distribution {
    fn new(vocab: &[String], weights: &[f64], smoothing: f64) -> Self {
        let total: f64 = weights.iter().sum::<f64>() + smoothing * vocab.len() as f64;
        let logprob: Vec<f64> = weights.iter().map(|w| ((w + smoothing) / total).ln()).collect();
        let mut order: Vec<u32> = (0..vocab.len() as u32).collect();
        order.sort_by(|&a, &b| {
            let (a, b) = (a as usize, b as usize);
            completion_order(&vocab[a], logprob[a], &vocab[b], logprob[b])
        });
        let mut rank = vec![0u32; vocab.len()];
        for (pos, &id) in order.iter().enumerate() {
            rank[id as usize] = pos as u32 + 1;
        }
        Distribution { order, logprob, rank }
    }
}

/// In-process mock backend built from a [`WorldSpec`].
#[derive(Debug, Clone)]
pub struct MockLm {
    id: String,
    vocab: Vec<String>,
    vocab_ids: HashMap<String, u32>,
    templates: HashMap<Vec<String>, usize>,
    dists: Vec<Distribution>,
    uniform: Distribution,
    max_context: usize,
    max_top_q: Option<usize>,
}

/// Tokenize a template into pattern tokens with the slot as the mask.
pub fn template_tokens(text: &str) -> Option<Vec<String>> {
    let mut parts = text.split(SLOT);
    let (left, right) = (parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    let cfg = TokenizerConfig::default();
    let mut tokens = tokenize_words(left, cfg);
    tokens.push(MASK.to_owned());
    tokens.extend(tokenize_words(right, cfg));
    Some(tokens)
}

fn vocab_item(term: &str) -> Option<String> {
    let words = tokenize_words(&normalize(term), TokenizerConfig::default());
    match words.as_slice() {
        [one] => Some(one.clone()),
        _ => None,
    }
}

impl MockLm {
    pub fn build(world: &WorldSpec) -> Result<Self, WorldError> {
        if !(world.smoothing.is_finite() && world.smoothing > 0.0) {
            return Err(WorldError::BadSmoothing(world.smoothing));
        }
        let mut vocab_set = BTreeSet::new();
        for cat in &world.categories {
            if cat.members.is_empty() {
                return Err(WorldError::EmptyCategory(cat.name.clone()));
            }
            vocab_set.extend(cat.members.iter().filter_map(|m| vocab_item(m)));
        }
        vocab_set.extend(world.extra_terms.iter().filter_map(|m| vocab_item(m)));
        for t in &world.templates {
            for (term, w) in &t.weights {
                if !(w.is_finite() && *w >= 0.0) {
                    return Err(WorldError::BadWeight { template: t.text.clone(), term: term.clone() });
                }
            }
            vocab_set.extend(t.weights.keys().filter_map(|m| vocab_item(m)));
        }
        if vocab_set.is_empty() {
            return Err(WorldError::EmptyVocabulary);
        }
        let vocab: Vec<String> = vocab_set.into_iter().collect();
        let vocab_ids: HashMap<String, u32> =
            vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

        let mut templates = HashMap::new();
        let mut dists = Vec::with_capacity(world.templates.len());
        for t in &world.templates {
            let tokens = template_tokens(&t.text).ok_or_else(|| WorldError::BadTemplate(t.text.clone()))?;
            let mut weights = vec![0.0; vocab.len()];
            for (term, w) in &t.weights {
                if let Some(id) = vocab_item(term).and_then(|v| vocab_ids.get(&v)) {
                    weights[*id as usize] += w;
                }
            }
            let dist = Distribution::new(&vocab, &weights, world.smoothing);
            // Identical template texts merge into the first occurrence.
            templates.entry(tokens).or_insert_with(|| {
                dists.push(dist);
                dists.len() - 1
            });
        }
        let uniform = Distribution::new(&vocab, &vec![0.0; vocab.len()], world.smoothing);
        Ok(MockLm {
            id: format!("mock:{}", world.id),
            vocab,
            vocab_ids,
            templates,
            dists,
            uniform,
            max_context: world.max_context,
            max_top_q: None,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, WorldError> {
        Self::build(&WorldSpec::load(path)?)
    }

    /// Cap the `top_q` this backend serves, to emulate a truncating backend.
    pub fn with_max_top_q(mut self, cap: usize) -> Self {
        self.max_top_q = Some(cap);
        self
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    /// Probability of `term` for `pattern`, straight from the world weights.
    pub fn probability(&self, pattern: &MaskedPattern, term: &str) -> Option<f64> {
        let id = *self.vocab_ids.get(term)?;
        Some(self.dist_for(pattern).logprob[id as usize].exp())
    }

    fn dist_for(&self, pattern: &MaskedPattern) -> &Distribution {
        match self.templates.get(pattern.tokens()) {
            Some(&i) => &self.dists[i],
            None => &self.uniform,
        }
    }
}

impl MlmBackend for MockLm {
    fn id(&self) -> &str {
        &self.id
    }

    fn info(&self) -> Result<BackendInfo, MlmError> {
        Ok(BackendInfo {
            model: self.id.clone(),
            vocab_size: self.vocab.len(),
            max_context: self.max_context,
            max_top_q: self.max_top_q,
        })
    }

    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms_of_interest: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        check_request(pattern, top_q, self.max_context)?;
        if let Some(cap) = self.max_top_q {
            if top_q > cap {
                return Err(MlmError::InvalidRequest {
                    code: "top_q_too_large".into(),
                    detail: format!("top_q {top_q} exceeds limit {cap}"),
                });
            }
        }
        let dist = self.dist_for(pattern);
        let entries = dist
            .order
            .iter()
            .take(top_q)
            .map(|&id| Completion {
                term: self.vocab[id as usize].clone(),
                logprob: dist.logprob[id as usize],
            })
            .collect();
        let mut lookup = RankLookup::new();
        for term in terms_of_interest {
            let entry = self.vocab_ids.get(term.as_str()).map(|&id| RankEntry {
                rank: dist.rank[id as usize] as usize,
                logprob: dist.logprob[id as usize],
            });
            lookup.insert(term.clone(), entry);
        }
        Ok((CompletionResult { vocab_size: self.vocab.len(), entries }, lookup))
    }

    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        Ok(self.vocab_ids.contains_key(term))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(text: &str, weights: &[(&str, f64)]) -> TemplateSpec {
        TemplateSpec {
            text: text.into(),
            weights: weights.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
        }
    }

    fn world(templates: Vec<TemplateSpec>, extra: &[&str]) -> WorldSpec {
        WorldSpec {
            id: "t".into(),
            smoothing: 0.5,
            max_context: 16,
            categories: vec![],
            extra_terms: extra.iter().map(|s| s.to_string()).collect(),
            templates,
        }
    }

    fn pat(text: &str) -> MaskedPattern {
        let toks = template_tokens(text).unwrap();
        let i = toks.iter().position(|t| t == MASK).unwrap();
        MaskedPattern::new(toks, i).unwrap()
    }

    #[test]
    fn planted_members_outrank_noise() {
        let mut w = world(vec![template("the capital of france is {}", &[("a", 3.0), ("b", 2.0)])], &[]);
        w.categories.push(CategorySpec { name: "c".into(), members: vec!["a".into(), "b".into()] });
        w.extra_terms = (0..20).map(|i| format!("noise{i}")).collect();
        let lm = MockLm::build(&w).unwrap();
        let p = pat("the capital of france is {}");
        let (res, lookup) = lm.complete(&p, 3, &["a".into(), "b".into()]).unwrap();
        assert_eq!(res.terms().take(2).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(lookup.rank_of("a"), Ok(1));
        assert_eq!(lookup.rank_of("b"), Ok(2));
    }

    #[test]
    fn distribution_matches_hand_counts() {
        // Vocab {x, y, z}, smoothing 0.5.
        let w = world(
            vec![
                template("one {} here", &[("x", 2.0), ("y", 1.0)]),
                template("two {} there", &[("z", 4.0)]),
                template("three {}", &[("x", 1.0), ("y", 1.0), ("z", 1.0)]),
            ],
            &[],
        );
        let lm = MockLm::build(&w).unwrap();
        let cases: [(&str, [f64; 3]); 3] = [
            ("one {} here", [2.5 / 4.5, 1.5 / 4.5, 0.5 / 4.5]),
            ("two {} there", [0.5 / 5.5, 0.5 / 5.5, 4.5 / 5.5]),
            ("three {}", [1.5 / 4.5, 1.5 / 4.5, 1.5 / 4.5]),
        ];
        for (text, expect) in cases {
            let p = pat(text);
            for (term, e) in ["x", "y", "z"].iter().zip(expect) {
                let got = lm.probability(&p, term).unwrap();
                assert!((got - e).abs() < 1e-12, "{text} {term}: {got} vs {e}");
            }
        }
    }

    #[test]
    fn uniform_world_ties_lexicographically() {
        let w = world(vec![template("{} here", &[])], &["delta", "alpha", "charlie", "bravo"]);
        let lm = MockLm::build(&w).unwrap();
        let (res, _) = lm.complete(&pat("{} here"), 10, &[]).unwrap();
        assert_eq!(res.terms().collect::<Vec<_>>(), ["alpha", "bravo", "charlie", "delta"]);
        assert!(res.entries.windows(2).all(|w| w[0].logprob == w[1].logprob));
    }

    #[test]
    fn full_distribution_sums_to_one() {
        let vocab: Vec<String> = (0..100).map(|i| format!("w{i:03}")).collect();
        let weights: Vec<(&str, f64)> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), (i % 7) as f64)).collect();
        let w = world(vec![template("a {} b", &weights)], &[]);
        let lm = MockLm::build(&w).unwrap();
        let full = super::super::full_distribution(&lm, &pat("a {} b")).unwrap();
        assert_eq!(full.entries.len(), 100);
        let sum: f64 = full.entries.iter().map(|c| c.logprob.exp()).sum();
        assert!((sum - 1.0).abs() < 1e-9, "{sum}");
    }

    #[test]
    fn multi_word_terms_are_oov() {
        let w = world(vec![template("{} x", &[("new york", 1.0), ("paris", 1.0)])], &[]);
        let lm = MockLm::build(&w).unwrap();
        assert!(!lm.contains("new york").unwrap());
        let (_, lookup) = lm.complete(&pat("{} x"), 1, &["new york".into()]).unwrap();
        assert_eq!(lookup.rank_of("new york"), Err(super::super::RankError::OutOfVocabulary("new york".into())));
    }

    #[test]
    fn rejects_invalid_worlds() {
        let mut w = world(vec![template("{} x", &[("a", 1.0)])], &[]);
        w.categories.push(CategorySpec { name: "empty".into(), members: vec![] });
        assert!(matches!(MockLm::build(&w), Err(WorldError::EmptyCategory(_))));
        let w = world(vec![template("{} x", &[])], &[]);
        assert!(matches!(MockLm::build(&w), Err(WorldError::EmptyVocabulary)));
        let w = world(vec![template("no slot", &[("a", 1.0)])], &[]);
        assert!(matches!(MockLm::build(&w), Err(WorldError::BadTemplate(_))));
        let w = world(vec![template("{} {}", &[("a", 1.0)])], &[]);
        assert!(matches!(MockLm::build(&w), Err(WorldError::BadTemplate(_))));
        let w = world(vec![template("{} x", &[("a", -1.0)])], &[]);
        assert!(matches!(MockLm::build(&w), Err(WorldError::BadWeight { .. })));
    }

    #[test]
    fn enforces_context_limit_and_top_q() {
        let w = world(vec![template("{} x", &[("a", 1.0)])], &[]);
        let lm = MockLm::build(&w).unwrap();
        let long = pat(&format!("{} {{}}", vec!["w"; 20].join(" ")));
        assert_eq!(
            lm.complete(&long, 1, &[]).unwrap_err(),
            MlmError::ContextTooLong { len: 21, limit: 16 }
        );
        assert!(matches!(lm.complete(&pat("{} x"), 0, &[]), Err(MlmError::InvalidRequest { .. })));
    }
}
