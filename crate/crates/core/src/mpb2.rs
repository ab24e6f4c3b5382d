//! Candidate scoring by pattern similarity.
//!
//! Two patterns are similar when the LM predicts largely the same top-q
//! completions for both. A candidate term is masked at each of its corpus
//! occurrences, and scores `sum_i c_i * max_{m in pats(t)} sim(m_i, m)`:
//! for every indicative pattern, the best-matching occurrence counts.
//! Terms may be multi-word, since only the corpus masking sees them.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::candidates::CandidateSet;
use crate::corpus::{CorpusError, CorpusIndex};
use crate::expansion::{Expansion, Method};
use crate::mining::IndicativePatternSet;
use crate::mlm::{top_terms, MlmBackend, MlmError};
use crate::pattern::MaskedPattern;
use crate::term::Term;

#[derive(Debug, Error)]
pub enum Mpb2Error {
    #[error("candidate list is empty; generate candidates from embeddings or pass a candidate file")]
    NoCandidates,
    #[error("indicative pattern set is empty")]
    NoPatterns,
    #[error("invalid similarity configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Mlm(#[from] MlmError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityConfig {
    /// Completions compared per pattern.
    pub q: usize,
    /// Corpus occurrences masked per candidate.
    pub max_occurrences: usize,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { q: 50, max_occurrences: 20 }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), Mpb2Error> {
        if self.q == 0 {
            return Err(Mpb2Error::Config("q must be at least 1".into()));
        }
        if self.max_occurrences == 0 {
            return Err(Mpb2Error::Config("max occurrences must be at least 1".into()));
        }
        Ok(())
    }
}

/// Shared fraction of two top lists. `denom` is the list length the lists
/// were requested at (q, or the vocabulary size if that is smaller).
pub fn overlap(a: &HashSet<String>, b: &HashSet<String>, denom: usize) -> f64 {
    a.intersection(b).count() as f64 / denom as f64
}

fn top_set<B: MlmBackend + ?Sized>(backend: &B, p: &MaskedPattern, q: usize) -> Result<HashSet<String>, MlmError> {
    Ok(top_terms(backend, p, q)?.entries.into_iter().map(|c| c.term).collect())
}

fn effective_q<B: MlmBackend + ?Sized>(backend: &B, q: usize) -> Result<usize, MlmError> {
    Ok(q.min(backend.info()?.vocab_size).max(1))
}

/// Fraction of shared terms among the top-q completions of `a` and `b`.
pub fn pattern_similarity<B: MlmBackend + ?Sized>(
    backend: &B,
    a: &MaskedPattern,
    b: &MaskedPattern,
    q: usize,
) -> Result<f64, MlmError> {
    let q = effective_q(backend, q)?;
    Ok(overlap(&top_set(backend, a, q)?, &top_set(backend, b, q)?, q))
}

/// A candidate term with the patterns from its corpus occurrences.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOccurrences {
    pub term: Term,
    pub patterns: Vec<MaskedPattern>,
}

pub fn collect_pats(index: &CorpusIndex, term: &str, max_occurrences: usize) -> Result<CandidateOccurrences, CorpusError> {
    let term = Term::new(term);
    let occ = index.find_occurrences(term.as_str(), max_occurrences)?;
    let patterns = occ.iter().map(|o| index.mask_occurrence(o)).collect::<Result<_, _>>()?;
    Ok(CandidateOccurrences { term, patterns })
}

/// `sum_i weights[i] * max_j sims[i][j]`, with an empty row contributing 0.
pub fn combine(weights: &[f64], sims: &[Vec<f64>]) -> f64 {
    weights
        .iter()
        .zip(sims)
        .map(|(w, row)| w * row.iter().copied().fold(0.0, f64::max))
        .sum()
}

/// Scores candidates against a fixed indicative set, whose top-q lists are
/// fetched once up front.
pub struct Mpb2Scorer<'a, B: ?Sized> {
    backend: &'a B,
    weights: Vec<f64>,
    indicative: Vec<HashSet<String>>,
    q: usize,
}

impl<'a, B: MlmBackend + ?Sized> Mpb2Scorer<'a, B> {
    pub fn new(backend: &'a B, patterns: &IndicativePatternSet, q: usize) -> Result<Self, Mpb2Error> {
        if patterns.is_empty() {
            return Err(Mpb2Error::NoPatterns);
        }
        let q = effective_q(backend, q)?;
        let indicative = patterns
            .patterns()
            .par_iter()
            .map(|p| top_set(backend, &p.pattern, q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Mpb2Scorer { backend, weights: patterns.weights().to_vec(), indicative, q })
    }

    /// Score in `[0, 1]`; 0 when `patterns` is empty.
    pub fn score_patterns(&self, patterns: &[MaskedPattern]) -> Result<f64, MlmError> {
        let tops = patterns.iter().map(|p| top_set(self.backend, p, self.q)).collect::<Result<Vec<_>, _>>()?;
        let sims: Vec<Vec<f64>> = self
            .indicative
            .iter()
            .map(|ind| tops.iter().map(|t| overlap(ind, t, self.q)).collect())
            .collect();
        Ok(combine(&self.weights, &sims))
    }

    pub fn score_candidate(&self, occ: &CandidateOccurrences) -> Result<f64, MlmError> {
        self.score_patterns(&occ.patterns)
    }
}

/// Score and rank `candidates`. `method` is recorded on the expansion
/// (plain or oracle-augmented candidates).
pub fn expand_mpb2<B: MlmBackend + ?Sized>(
    backend: &B,
    index: &CorpusIndex,
    indicative: &IndicativePatternSet,
    candidates: &CandidateSet,
    cfg: &SimilarityConfig,
    top_n: usize,
    method: Method,
) -> Result<Expansion, Mpb2Error> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(Mpb2Error::NoCandidates);
    }
    let scorer = Mpb2Scorer::new(backend, indicative, cfg.q)?;
    let scored = candidates
        .entries
        .par_iter()
        .map(|(term, _)| {
            let occ = collect_pats(index, term, cfg.max_occurrences)?;
            let empty = occ.patterns.is_empty();
            let score = scorer.score_candidate(&occ)?;
            Ok((occ.term.into_string(), score, empty))
        })
        .collect::<Result<Vec<_>, Mpb2Error>>()?;
    let unseen = scored.iter().filter(|(_, _, empty)| *empty).count();
    if unseen > 0 {
        log::info!("{unseen} of {} candidates do not occur in the corpus and score 0", scored.len());
    }
    Ok(Expansion::ranked(method, scored.into_iter().map(|(t, s, _)| (t, s)), top_n)
        .with_meta("candidates", candidates.len())
        .with_meta("candidates_without_occurrences", unseen)
        .with_meta("q", scorer.q))
}
