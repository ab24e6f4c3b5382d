//! Indicative pattern mining.
//!
//! Every corpus occurrence of a seed term, masked, is a pattern candidate.
//! A candidate's score is the worst (largest) rank any seed gets among the
//! LM completions of the pattern; candidates are taken best-first, skipping
//! any that shares too many tokens with a pattern already kept. Kept
//! patterns are weighted by normalized inverse worst rank.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, CorpusIndex};
use crate::mlm::{MlmBackend, MlmError, RankError};
use crate::pattern::MaskedPattern;
use crate::term::Term;

#[derive(Debug, Error)]
pub enum MiningError {
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("duplicate seed term {0:?}")]
    DuplicateSeed(String),
    #[error("seed term {0:?} does not occur in the corpus")]
    MissingSeed(String),
    #[error("seed term {0:?} is not in the language model vocabulary")]
    OovSeed(String),
    #[error("no candidate patterns to select from")]
    NoCandidates,
    #[error("cannot weight an empty pattern list")]
    EmptyRanks,
    #[error("rank must be at least 1, got {0}")]
    ZeroRank(usize),
    #[error("invalid mining configuration: {0}")]
    Config(String),
    #[error("malformed pattern file at line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Mlm(#[from] MlmError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The user-supplied example terms, normalized and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    terms: Vec<Term>,
}

impl SeedSet {
    pub fn new<I, S>(terms: I) -> Result<Self, MiningError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<Term> = Vec::new();
        for raw in terms {
            let t = Term::new(raw.as_ref());
            if t.is_empty() {
                continue;
            }
            if out.contains(&t) {
                return Err(MiningError::DuplicateSeed(t.into_string()));
            }
            out.push(t);
        }
        if out.is_empty() {
            return Err(MiningError::EmptySeeds);
        }
        Ok(SeedSet { terms: out })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn strings(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.as_str().to_owned()).collect()
    }

    /// Fail on the first seed the backend does not know.
    pub fn check_vocabulary<B: MlmBackend + ?Sized>(&self, backend: &B) -> Result<(), MiningError> {
        for t in &self.terms {
            if !backend.contains(t.as_str())? {
                return Err(MiningError::OovSeed(t.as_str().to_owned()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// Sentences collected per seed term.
    pub per_seed_sentences: usize,
    /// Patterns to keep.
    pub patterns: usize,
    /// Minimum fraction of a candidate's tokens absent from every kept
    /// pattern.
    pub diversity_fraction: f64,
    /// Candidates with a worse rank than this are never kept.
    pub max_rank_cap: Option<usize>,
}

impl MiningConfig {
    /// Per-seed sentence count for a total sentence budget split evenly
    /// over `k` seeds.
    pub fn with_budget(total_sentences: usize, k: usize, patterns: usize) -> Self {
        MiningConfig {
            per_seed_sentences: (total_sentences / k.max(1)).max(1),
            patterns,
            ..Default::default()
        }
    }

    pub fn validate(&self, k: usize) -> Result<(), MiningError> {
        let bad = |m: String| Err(MiningError::Config(m));
        if self.per_seed_sentences == 0 {
            return bad("per-seed sentence count must be positive".into());
        }
        if self.patterns == 0 {
            return bad("pattern count must be positive".into());
        }
        if !(self.diversity_fraction > 0.0 && self.diversity_fraction <= 1.0) {
            return bad(format!("diversity fraction {} not in (0, 1]", self.diversity_fraction));
        }
        if self.patterns > k * self.per_seed_sentences {
            return bad(format!(
                "cannot keep {} patterns out of at most {} candidates",
                self.patterns,
                k * self.per_seed_sentences
            ));
        }
        if self.max_rank_cap == Some(0) {
            return bad("rank cap must be positive".into());
        }
        Ok(())
    }
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { per_seed_sentences: 666, patterns: 160, diversity_fraction: 0.5, max_rank_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePattern {
    pub pattern: MaskedPattern,
    /// Index into the seed set.
    pub source_seed: usize,
}

#[derive(Debug, Clone)]
pub struct CandidateCollection {
    pub candidates: Vec<CandidatePattern>,
    /// Occurrences used per seed (at most the per-seed limit).
    pub per_seed: Vec<usize>,
}

/// Mask up to `per_seed` corpus occurrences of each seed, in corpus order.
///
/// Candidates are interleaved round-robin across seeds (first occurrence of
/// each seed, then second of each, ...), so any prefix of the list draws
/// evenly on all seeds.
pub fn collect_candidates(
    index: &CorpusIndex,
    seeds: &SeedSet,
    per_seed: usize,
) -> Result<CandidateCollection, MiningError> {
    let mut per_seed_patterns = Vec::with_capacity(seeds.len());
    for seed in seeds.terms() {
        let occ = index.find_occurrences(seed.as_str(), per_seed)?;
        if occ.is_empty() {
            return Err(MiningError::MissingSeed(seed.as_str().to_owned()));
        }
        let patterns = occ.iter().map(|o| index.mask_occurrence(o)).collect::<Result<Vec<_>, _>>()?;
        per_seed_patterns.push(patterns);
    }
    let counts: Vec<usize> = per_seed_patterns.iter().map(Vec::len).collect();
    let longest = counts.iter().copied().max().unwrap_or(0);
    let mut candidates = Vec::with_capacity(counts.iter().sum());
    let mut iters: Vec<_> = per_seed_patterns.into_iter().map(Vec::into_iter).collect();
    for _ in 0..longest {
        for (seed, it) in iters.iter_mut().enumerate() {
            if let Some(pattern) = it.next() {
                candidates.push(CandidatePattern { pattern, source_seed: seed });
            }
        }
    }
    for (seed, n) in seeds.terms().iter().zip(&counts) {
        if *n < per_seed {
            log::info!("seed {seed:?}: {n} occurrences available, {per_seed} requested");
        }
    }
    Ok(CandidateCollection { candidates, per_seed: counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPattern {
    pub pattern: MaskedPattern,
    pub source_seed: usize,
    pub per_seed_ranks: Vec<usize>,
    pub max_rank: usize,
}

/// Rank every seed among the completions of `pattern` and keep the worst.
pub fn score_pattern<B: MlmBackend + ?Sized>(
    backend: &B,
    candidate: &CandidatePattern,
    seeds: &SeedSet,
) -> Result<ScoredPattern, MiningError> {
    let terms = seeds.strings();
    let (_, lookup) = backend.complete(&candidate.pattern, 1, &terms)?;
    let per_seed_ranks = terms
        .iter()
        .map(|t| {
            lookup.rank_of(t).map_err(|e| match e {
                RankError::OutOfVocabulary(t) => MiningError::OovSeed(t),
                RankError::NotRequested(t) => {
                    MlmError::Protocol(format!("backend omitted requested term {t:?}")).into()
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_rank = per_seed_ranks.iter().copied().max().unwrap_or(1);
    Ok(ScoredPattern { pattern: candidate.pattern.clone(), source_seed: candidate.source_seed, per_seed_ranks, max_rank })
}

/// Normalized inverse ranks: `c_i = (1/r_i) / sum_j (1/r_j)`.
pub fn compute_weights(max_ranks: &[usize]) -> Result<Vec<f64>, MiningError> {
    if max_ranks.is_empty() {
        return Err(MiningError::EmptyRanks);
    }
    if let Some(&r) = max_ranks.iter().find(|&&r| r == 0) {
        return Err(MiningError::ZeroRank(r));
    }
    let inv: Vec<f64> = max_ranks.iter().map(|&r| 1.0 / r as f64).collect();
    let total: f64 = inv.iter().sum();
    Ok(inv.into_iter().map(|x| x / total).collect())
}

fn context_set(p: &MaskedPattern) -> HashSet<&str> {
    p.context().collect()
}

/// Fraction of `candidate`'s distinct non-mask tokens that do not appear in
/// `kept`. A candidate with no context tokens differs by 0.
pub fn differing_fraction(candidate: &MaskedPattern, kept: &MaskedPattern) -> f64 {
    set_difference_fraction(&context_set(candidate), &context_set(kept))
}

fn set_difference_fraction(candidate: &HashSet<&str>, kept: &HashSet<&str>) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    candidate.difference(kept).count() as f64 / candidate.len() as f64
}

/// Selected patterns with their weights, best (lowest max rank) first.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicativePatternSet {
    patterns: Vec<ScoredPattern>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PatternLine {
    tokens: Vec<String>,
    mask_index: usize,
    source_seed: usize,
    per_seed_ranks: Vec<usize>,
    max_rank: usize,
    weight: f64,
}

impl IndicativePatternSet {
    /// Weight `patterns` by inverse max rank.
    pub fn from_scored(patterns: Vec<ScoredPattern>) -> Result<Self, MiningError> {
        let ranks: Vec<usize> = patterns.iter().map(|p| p.max_rank).collect();
        let weights = compute_weights(&ranks)?;
        Ok(IndicativePatternSet { patterns, weights })
    }

    pub fn patterns(&self) -> &[ScoredPattern] {
        &self.patterns
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScoredPattern, f64)> {
        self.patterns.iter().zip(self.weights.iter().copied())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (p, weight) in self.iter() {
            let line = PatternLine {
                tokens: p.pattern.tokens().to_vec(),
                mask_index: p.pattern.mask_index(),
                source_seed: p.source_seed,
                per_seed_ranks: p.per_seed_ranks.clone(),
                max_rank: p.max_rank,
                weight,
            };
            serde_json::to_writer(&mut w, &line).map_err(io::Error::other)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Read patterns written by [`IndicativePatternSet::write_jsonl`].
    /// Weights are recomputed from the max ranks; lines starting with `#`
    /// are skipped.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, MiningError> {
        let mut patterns = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fmt = |d: String| MiningError::Format { line: i + 1, detail: d };
            let parsed: PatternLine = serde_json::from_str(trimmed).map_err(|e| fmt(e.to_string()))?;
            let pattern = MaskedPattern::new(parsed.tokens, parsed.mask_index).map_err(|e| fmt(e.to_string()))?;
            patterns.push(ScoredPattern {
                pattern,
                source_seed: parsed.source_seed,
                per_seed_ranks: parsed.per_seed_ranks,
                max_rank: parsed.max_rank,
            });
        }
        Self::from_scored(patterns)
    }
}

/// Sort by (max rank, pattern text) and keep patterns greedily while they
/// differ enough from everything kept so far, up to `config.patterns`.
pub fn select_indicative(
    candidates: &[ScoredPattern],
    config: &MiningConfig,
) -> Result<IndicativePatternSet, MiningError> {
    if candidates.is_empty() {
        return Err(MiningError::NoCandidates);
    }
    let mut order: Vec<(&ScoredPattern, String)> = candidates.iter().map(|c| (c, c.pattern.text())).collect();
    order.sort_by(|(a, at), (b, bt)| a.max_rank.cmp(&b.max_rank).then_with(|| at.cmp(bt)));

    let mut kept: Vec<&ScoredPattern> = Vec::with_capacity(config.patterns);
    let mut kept_sets: Vec<HashSet<&str>> = Vec::with_capacity(config.patterns);
    for (cand, _) in order {
        if kept.len() == config.patterns {
            break;
        }
        if config.max_rank_cap.is_some_and(|cap| cand.max_rank > cap) {
            break;
        }
        let set = context_set(&cand.pattern);
        let diverse = kept_sets
            .iter()
            .all(|k| set_difference_fraction(&set, k) >= config.diversity_fraction);
        if diverse {
            kept.push(cand);
            kept_sets.push(set);
        }
    }
    if kept.len() < config.patterns {
        log::warn!(
            "only {} of {} requested patterns survived selection ({} candidates)",
            kept.len(),
            config.patterns,
            candidates.len()
        );
    }
    IndicativePatternSet::from_scored(kept.into_iter().cloned().collect())
}

/// Collect, score and select indicative patterns for `seeds`.
pub fn mine<B: MlmBackend + ?Sized>(
    backend: &B,
    index: &CorpusIndex,
    seeds: &SeedSet,
    config: &MiningConfig,
) -> Result<IndicativePatternSet, MiningError> {
    config.validate(seeds.len())?;
    seeds.check_vocabulary(backend)?;
    let collection = collect_candidates(index, seeds, config.per_seed_sentences)?;
    let scored = collection
        .candidates
        .par_iter()
        .map(|c| score_pattern(backend, c, seeds))
        .collect::<Result<Vec<_>, _>>()?;
    log::debug!("scored {} candidate patterns", scored.len());
    select_indicative(&scored, config)
}
