//! Vocabulary scoring by a weighted product of experts.
//!
//! Each indicative pattern is an expert giving a completion distribution
//! over the LM vocabulary. A term's score is the weighted sum of its
//! log-probabilities, `score(t) = sum_i c_i * log p(t | m_i)`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::expansion::{Expansion, Method};
use crate::mining::CandidatePattern;
use crate::mining::IndicativePatternSet;
use crate::mlm::{full_distribution, BackendInfo, CompletionResult, MlmBackend, MlmError};
use crate::pattern::MaskedPattern;

#[derive(Debug, Clone, PartialEq)]
pub struct Mpb1Config {
    pub top_n: usize,
    /// For backends that cap `top_q`: request this many completions per
    /// pattern and give absent terms a floor log-probability.
    pub fallback_top_q: Option<usize>,
}

impl Default for Mpb1Config {
    fn default() -> Self {
        Mpb1Config { top_n: 200, fallback_top_q: None }
    }
}

/// Log-probability assumed for terms missing from a truncated completion
/// list: one tenth of the uniform probability.
pub fn floor_logprob(vocab_size: usize) -> f64 {
    -((vocab_size as f64) * 10.0).ln()
}

fn fetch<B: MlmBackend + ?Sized>(
    backend: &B,
    info: &BackendInfo,
    pattern: &MaskedPattern,
    cfg: &Mpb1Config,
) -> Result<CompletionResult, MlmError> {
    let truncating = info.max_top_q.is_some_and(|cap| cap < info.vocab_size);
    match (truncating, cfg.fallback_top_q) {
        (true, Some(q)) => {
            let q = q.min(info.max_top_q.unwrap_or(q));
            backend.complete(pattern, q, &[]).map(|(r, _)| r)
        }
        _ => full_distribution(backend, pattern),
    }
}

/// Score every term appearing in any pattern's completions and keep the
/// best `top_n`. Weights need not be normalized.
pub fn score_weighted<B: MlmBackend + ?Sized>(
    backend: &B,
    method: Method,
    patterns: &[MaskedPattern],
    weights: &[f64],
    cfg: &Mpb1Config,
) -> Result<Expansion, MlmError> {
    assert_eq!(patterns.len(), weights.len(), "one weight per pattern");
    if patterns.is_empty() {
        return Err(MlmError::InvalidRequest {
            code: "no_patterns".into(),
            detail: "cannot score with an empty pattern set".into(),
        });
    }
    let info = backend.info()?;
    let dists = patterns
        .par_iter()
        .map(|p| fetch(backend, &info, p, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    // Dense accumulation in vocabulary-id order; ids are assigned in order of
    // first appearance so the layout is independent of thread scheduling.
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut terms: Vec<&str> = Vec::new();
    for d in &dists {
        for c in &d.entries {
            ids.entry(c.term.as_str()).or_insert_with(|| {
                terms.push(c.term.as_str());
                terms.len() - 1
            });
        }
    }
    let floor = floor_logprob(info.vocab_size);
    let mut scores = vec![0.0f64; terms.len()];
    let mut seen = vec![false; terms.len()];
    let mut floored = vec![false; terms.len()];
    for (d, &w) in dists.iter().zip(weights) {
        seen.iter_mut().for_each(|s| *s = false);
        for c in &d.entries {
            let id = ids[c.term.as_str()];
            scores[id] += w * c.logprob;
            seen[id] = true;
        }
        for id in 0..terms.len() {
            if !seen[id] {
                scores[id] += w * floor;
                floored[id] = true;
            }
        }
    }
    let floored_count = floored.iter().filter(|&&f| f).count();
    let mut exp = Expansion::ranked(
        method,
        terms.iter().zip(scores).map(|(t, s)| ((*t).to_owned(), s)),
        cfg.top_n,
    );
    if dists.iter().any(|d| !d.is_full()) {
        exp = exp.with_meta("floor_logprob", floor).with_meta("floored_terms", floored_count);
    }
    Ok(exp.with_meta("patterns", patterns.len()))
}

/// Score the vocabulary with the indicative patterns and their weights.
pub fn score_vocab_terms<B: MlmBackend + ?Sized>(
    backend: &B,
    patterns: &IndicativePatternSet,
    cfg: &Mpb1Config,
) -> Result<Expansion, MlmError> {
    let pats: Vec<MaskedPattern> = patterns.patterns().iter().map(|p| p.pattern.clone()).collect();
    score_weighted(backend, Method::Mpb1, &pats, patterns.weights(), cfg)
}

/// Unselected baseline: the first `patterns` collected candidates with
/// uniform weights.
pub fn expand_bb<B: MlmBackend + ?Sized>(
    backend: &B,
    candidates: &[CandidatePattern],
    patterns: usize,
    cfg: &Mpb1Config,
) -> Result<Expansion, MlmError> {
    let pats: Vec<MaskedPattern> = candidates.iter().take(patterns).map(|c| c.pattern.clone()).collect();
    let w = 1.0 / pats.len().max(1) as f64;
    score_weighted(backend, Method::Bb, &pats, &vec![w; pats.len()], cfg)
}
