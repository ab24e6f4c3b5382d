//! Gold sets, average precision and the experiment drivers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::{self, BufRead};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::candidates::{expand_s2v, mean_seed_vector, top_neighbors, CandidateSet, EmbeddingTable};
use crate::corpus::CorpusIndex;
use crate::error::{Error, Result};
use crate::expansion::{Expansion, Method};
use crate::mining::{collect_candidates, mine, IndicativePatternSet, MiningConfig, SeedSet};
use crate::mlm::MlmBackend;
use crate::mpb1::{expand_bb, score_vocab_terms, Mpb1Config};
use crate::mpb2::{expand_mpb2, SimilarityConfig};
use crate::term::normalize;

/// Ranking cutoff used for open-ended sets.
pub const OPEN_SET_CUTOFF: usize = 70;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold set {0:?} is empty")]
    EmptyGold(String),
    #[error("gold set {set:?}: {term:?} appears in more than one group")]
    Overlap { set: String, term: String },
    #[error("gold set line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error("subset group {0:?} is not in the superset")]
    NotSubset(String),
    #[error("need {need} seed terms but only {found} gold groups pass the method's preconditions")]
    NotEnoughSeeds { need: usize, found: usize },
    #[error("method {method} needs {resource}, which was not provided")]
    MissingResource { method: Method, resource: &'static str },
    #[error("invalid experiment setting: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Target class: groups of synonymous surface forms. A ranked term matches
/// a group when it equals any of the group's forms after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldSet {
    name: String,
    groups: Vec<Vec<String>>,
    open: bool,
    lookup: HashMap<String, usize>,
}

impl GoldSet {
    pub fn new<G, S>(name: &str, groups: G, open: bool) -> Result<Self, EvalError>
    where
        G: IntoIterator<Item = Vec<S>>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        let mut lookup = HashMap::new();
        for group in groups {
            let mut forms: Vec<String> = Vec::new();
            for f in group {
                let f = normalize(f.as_ref());
                if !f.is_empty() && !forms.contains(&f) {
                    forms.push(f);
                }
            }
            if forms.is_empty() {
                continue;
            }
            for f in &forms {
                if lookup.insert(f.clone(), out.len()).is_some() {
                    return Err(EvalError::Overlap { set: name.to_owned(), term: f.clone() });
                }
            }
            out.push(forms);
        }
        if out.is_empty() {
            return Err(EvalError::EmptyGold(name.to_owned()));
        }
        Ok(GoldSet { name: name.to_owned(), groups: out, open: false, lookup }.with_open(open))
    }

    fn with_open(mut self, open: bool) -> Self {
        self.open = open;
        self
    }

    /// One group per line, forms separated by tabs. Lines starting with `#`
    /// are comments; the comment `# kind: open` marks an open-ended set.
    pub fn read<R: BufRead>(name: &str, r: R) -> Result<Self, EvalError> {
        let mut groups = Vec::new();
        let mut open = false;
        for line in r.lines() {
            let line = line?;
            let t = line.trim();
            if let Some(comment) = t.strip_prefix('#') {
                if let Some(kind) = comment.trim().strip_prefix("kind:") {
                    open = kind.trim().eq_ignore_ascii_case("open");
                }
                continue;
            }
            if t.is_empty() {
                continue;
            }
            groups.push(line.split('\t').map(str::to_owned).collect::<Vec<_>>());
        }
        Self::new(name, groups, open)
    }

    /// Load a gold file, named after its file stem.
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let f = std::fs::File::open(path)?;
        Self::read(&name, io::BufReader::new(f))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn group_of(&self, term: &str) -> Option<usize> {
        self.lookup.get(&normalize(term)).copied()
    }

    /// The cutoff used when scoring against this set.
    pub fn cutoff(&self) -> Option<usize> {
        self.open.then_some(OPEN_SET_CUTOFF)
    }

    /// First surface form of every group.
    pub fn primary_forms(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|g| g[0].as_str())
    }

    /// Every group here shares a form with some group of `other`.
    pub fn check_subset_of(&self, other: &GoldSet) -> Result<(), EvalError> {
        for g in &self.groups {
            if !g.iter().any(|f| other.group_of(f).is_some()) {
                return Err(EvalError::NotSubset(g[0].clone()));
            }
        }
        Ok(())
    }
}

/// Expansion size for a set with `groups` members.
pub fn default_top_n(groups: usize) -> usize {
    if groups > 100 {
        350
    } else {
        200
    }
}

/// Average precision of `ranking` against `gold`, over the first `cutoff`
/// items when given.
///
/// Precision is summed at every position that credits a not-yet-credited
/// group, then divided by `min(|gold|, cutoff)`. Later surface forms of an
/// already credited group count as misses.
pub fn average_precision<'a, I>(ranking: I, gold: &GoldSet, cutoff: Option<usize>) -> f64
where
    I: IntoIterator<Item = &'a str>,
{
    let limit = cutoff.unwrap_or(usize::MAX);
    let mut credited = vec![false; gold.len()];
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, term) in ranking.into_iter().take(limit).enumerate() {
        if let Some(g) = gold.group_of(term) {
            if !credited[g] {
                credited[g] = true;
                hits += 1;
                sum += hits as f64 / (i + 1) as f64;
            }
        }
    }
    sum / gold.len().min(limit) as f64
}

/// Inputs shared by all trials. Which ones are needed depends on the
/// method.
#[derive(Clone, Copy, Default)]
pub struct Resources<'a> {
    pub backend: Option<&'a dyn MlmBackend>,
    pub index: Option<&'a CorpusIndex>,
    pub embeddings: Option<&'a EmbeddingTable>,
    /// Fixed candidate list for the similarity expander, used instead of
    /// embedding neighbours.
    pub candidates: Option<&'a CandidateSet>,
    /// Precomputed indicative patterns, used instead of mining.
    pub patterns: Option<&'a IndicativePatternSet>,
}

impl<'a> Resources<'a> {
    fn backend(&self, method: Method) -> Result<&'a dyn MlmBackend, EvalError> {
        self.backend.ok_or(EvalError::MissingResource { method, resource: "a language model backend" })
    }

    fn index(&self, method: Method) -> Result<&'a CorpusIndex, EvalError> {
        self.index.ok_or(EvalError::MissingResource { method, resource: "a corpus index" })
    }

    fn embeddings(&self, method: Method) -> Result<&'a EmbeddingTable, EvalError> {
        self.embeddings.ok_or(EvalError::MissingResource { method, resource: "an embedding table" })
    }

    fn indicative(
        &self,
        backend: &dyn MlmBackend,
        seeds: &SeedSet,
        cfg: &ExpandConfig,
    ) -> Result<std::borrow::Cow<'a, IndicativePatternSet>> {
        if let Some(p) = self.patterns {
            return Ok(std::borrow::Cow::Borrowed(p));
        }
        let mined = mine(backend, self.index(cfg.method)?, seeds, &cfg.mining(seeds.len()))?;
        Ok(std::borrow::Cow::Owned(mined))
    }

    /// Whether seeds must be present in the embedding table.
    fn needs_embedding_seeds(&self, method: Method) -> bool {
        match method {
            Method::S2v => true,
            Method::Mpb2 => self.candidates.is_none(),
            Method::Mpb2o => self.candidates.is_none() && self.embeddings.is_some(),
            Method::Mpb1 | Method::Bb => false,
        }
    }
}

/// Everything that determines one expansion, apart from the seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandConfig {
    pub method: Method,
    /// Total seed-containing sentences, split evenly over the seeds.
    pub sentences: usize,
    pub patterns: usize,
    pub diversity_fraction: f64,
    pub max_rank_cap: Option<usize>,
    pub q: usize,
    pub max_occurrences: usize,
    /// Embedding neighbours taken as candidates.
    pub candidates: Option<usize>,
    pub freq_cap: Option<usize>,
    /// Output size; `None` picks by gold-set size when evaluating, else 200.
    pub top_n: Option<usize>,
    pub fallback_top_q: Option<usize>,
}

impl ExpandConfig {
    pub fn for_method(method: Method) -> Self {
        let patterns = if method.uses_similarity() { 20 } else { 160 };
        ExpandConfig {
            method,
            sentences: 2000,
            patterns,
            diversity_fraction: 0.5,
            max_rank_cap: None,
            q: 50,
            max_occurrences: 20,
            candidates: None,
            freq_cap: Some(200_000),
            top_n: None,
            fallback_top_q: None,
        }
    }

    pub fn mining(&self, k: usize) -> MiningConfig {
        MiningConfig {
            per_seed_sentences: (self.sentences / k.max(1)).max(1),
            patterns: self.patterns,
            diversity_fraction: self.diversity_fraction,
            max_rank_cap: self.max_rank_cap,
        }
    }

    pub fn similarity(&self) -> SimilarityConfig {
        SimilarityConfig { q: self.q, max_occurrences: self.max_occurrences }
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let opt = |v: Option<usize>| v.map_or_else(|| "none".to_owned(), |v| v.to_string());
        let mut m = BTreeMap::new();
        m.insert("method".into(), self.method.to_string());
        m.insert("sentences".into(), self.sentences.to_string());
        m.insert("patterns".into(), self.patterns.to_string());
        m.insert("diversity".into(), self.diversity_fraction.to_string());
        m.insert("max_rank_cap".into(), opt(self.max_rank_cap));
        if self.method.uses_similarity() {
            m.insert("q".into(), self.q.to_string());
            m.insert("max_occurrences".into(), self.max_occurrences.to_string());
        }
        m.insert("candidates".into(), opt(self.candidates));
        m.insert("freq_cap".into(), opt(self.freq_cap));
        m.insert("top_n".into(), opt(self.top_n));
        m.insert("fallback_top_q".into(), opt(self.fallback_top_q));
        m
    }
}

fn similarity_candidates(
    res: &Resources,
    seeds: &SeedSet,
    cfg: &ExpandConfig,
    oracle: Option<&GoldSet>,
) -> Result<CandidateSet> {
    let method = cfg.method;
    let mut base = match (res.candidates, res.embeddings) {
        (Some(list), _) => list.clone(),
        (None, Some(table)) => {
            let n = cfg.candidates.ok_or_else(|| {
                EvalError::Config("the number of embedding candidates must be set for similarity expansion".into())
            })?;
            top_neighbors(table, &mean_seed_vector(table, seeds)?, n, cfg.freq_cap)?
        }
        (None, None) if method == Method::Mpb2o => CandidateSet::from_terms(Vec::<&str>::new()),
        (None, None) => return Err(res.embeddings(method).unwrap_err().into()),
    };
    if method == Method::Mpb2o {
        let gold = oracle.ok_or(EvalError::MissingResource { method, resource: "a gold set" })?;
        let terms: Vec<String> = base.terms().chain(gold.primary_forms()).map(str::to_owned).collect();
        base = CandidateSet::from_terms(terms);
    }
    Ok(base)
}

/// Run one expander for `seeds`. `oracle` supplies the extra candidates for
/// [`Method::Mpb2o`].
pub fn expand(
    res: &Resources,
    seeds: &SeedSet,
    cfg: &ExpandConfig,
    oracle: Option<&GoldSet>,
    top_n: usize,
) -> Result<Expansion> {
    let method = cfg.method;
    let mpb1_cfg = Mpb1Config { top_n, fallback_top_q: cfg.fallback_top_q };
    let mut exp = match method {
        Method::Mpb1 => {
            let backend = res.backend(method)?;
            let patterns = res.indicative(backend, seeds, cfg)?;
            score_vocab_terms(backend, &patterns, &mpb1_cfg)?
        }
        Method::Bb => {
            let backend = res.backend(method)?;
            let mining = cfg.mining(seeds.len());
            mining.validate(seeds.len())?;
            seeds.check_vocabulary(backend)?;
            let collected = collect_candidates(res.index(method)?, seeds, mining.per_seed_sentences)?;
            expand_bb(backend, &collected.candidates, cfg.patterns, &mpb1_cfg)?
        }
        Method::Mpb2 | Method::Mpb2o => {
            let backend = res.backend(method)?;
            let index = res.index(method)?;
            let patterns = res.indicative(backend, seeds, cfg)?;
            let candidates = similarity_candidates(res, seeds, cfg, oracle)?;
            expand_mpb2(backend, index, &patterns, &candidates, &cfg.similarity(), top_n, method)?
        }
        Method::S2v => expand_s2v(res.embeddings(method)?, seeds, top_n, cfg.freq_cap)?,
    };
    exp.config = cfg.to_map();
    exp.config.insert("seeds".into(), seeds.strings().join("|"));
    Ok(exp)
}

/// Why `term` cannot serve as a seed for `method`, if it cannot.
pub fn seed_problem(res: &Resources, method: Method, term: &str) -> Result<Option<String>> {
    if method.uses_lm() {
        if res.index(method)?.find_occurrences(term, 1)?.is_empty() {
            return Ok(Some("does not occur in the corpus".into()));
        }
        if !res.backend(method)?.contains(term)? {
            return Ok(Some("is not in the LM vocabulary".into()));
        }
    }
    if res.needs_embedding_seeds(method) && res.embeddings(method)?.get(term).is_none() {
        return Ok(Some("is not in the embedding table".into()));
    }
    Ok(None)
}

/// Seeds for one trial: gold groups in a random order drawn from
/// `(rng_seed, trial)`, first surface form of each, skipping forms the
/// method cannot use. Returns the seeds and the rejected forms.
pub fn sample_seeds(
    res: &Resources,
    gold: &GoldSet,
    method: Method,
    seed_size: usize,
    rng_seed: u64,
    trial: usize,
) -> Result<(SeedSet, Vec<String>)> {
    if seed_size == 0 {
        return Err(EvalError::Config("seed size must be positive".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(trial as u64);
    let mut order: Vec<usize> = (0..gold.len()).collect();
    order.shuffle(&mut rng);
    let mut picked = Vec::with_capacity(seed_size);
    let mut rejected = Vec::new();
    for g in order {
        if picked.len() == seed_size {
            break;
        }
        let term = &gold.groups()[g][0];
        match seed_problem(res, method, term)? {
            None => picked.push(term.clone()),
            Some(why) => {
                log::info!("trial {trial}: rejected seed {term:?}, which {why}");
                rejected.push(term.clone());
            }
        }
    }
    if picked.len() < seed_size {
        return Err(EvalError::NotEnoughSeeds { need: seed_size, found: picked.len() }.into());
    }
    Ok((SeedSet::new(&picked)?, rejected))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub trials: usize,
    pub seed_size: usize,
    pub rng_seed: u64,
    pub expand: ExpandConfig,
}

impl EvalConfig {
    pub fn new(method: Method) -> Self {
        EvalConfig { trials: 3, seed_size: 3, rng_seed: 17, expand: ExpandConfig::for_method(method) }
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = self.expand.to_map();
        m.insert("trials".into(), self.trials.to_string());
        m.insert("seed_size".into(), self.seed_size.to_string());
        m.insert("rng".into(), self.rng_seed.to_string());
        m
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.trials == 0 {
            return Err(EvalError::Config("trial count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seeds: Vec<String>,
    pub rejected_seeds: Vec<String>,
    pub ap: f64,
    pub returned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub set: String,
    pub method: Method,
    pub cutoff: Option<usize>,
    pub top_n: usize,
    pub trials: Vec<TrialResult>,
    pub map: f64,
    pub config: BTreeMap<String, String>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn trial_top_n(cfg: &ExpandConfig, gold: &GoldSet) -> usize {
    cfg.top_n.unwrap_or_else(|| default_top_n(gold.len()))
}

fn score_trial(
    res: &Resources,
    gold: &GoldSet,
    oracle: &GoldSet,
    cfg: &ExpandConfig,
    trial: usize,
    seeds: &SeedSet,
    rejected: Vec<String>,
) -> Result<TrialResult> {
    let wrap = |e: Error| Error::Trial { trial, source: Box::new(e) };
    let exp = expand(res, seeds, cfg, Some(oracle), trial_top_n(cfg, gold)).map_err(wrap)?;
    Ok(TrialResult {
        trial,
        seeds: seeds.strings(),
        rejected_seeds: rejected,
        ap: average_precision(exp.terms(), gold, gold.cutoff()),
        returned: exp.len(),
    })
}

/// Sample seeds for `trial`, expand and score against `gold`.
pub fn run_trial(res: &Resources, gold: &GoldSet, cfg: &EvalConfig, trial: usize) -> Result<TrialResult> {
    let (seeds, rejected) = sample_seeds(res, gold, cfg.expand.method, cfg.seed_size, cfg.rng_seed, trial)
        .map_err(|e| Error::Trial { trial, source: Box::new(e) })?;
    score_trial(res, gold, gold, &cfg.expand, trial, &seeds, rejected)
}

/// Mean average precision over `cfg.trials` independent trials. Trials run
/// in parallel; each draws from its own random stream, so the report does
/// not depend on scheduling.
pub fn evaluate(res: &Resources, gold: &GoldSet, cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(res, gold, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        set: gold.name().to_owned(),
        method: cfg.expand.method,
        cutoff: gold.cutoff(),
        top_n: trial_top_n(&cfg.expand, gold),
        map: mean(trials.iter().map(|t| t.ap)),
        trials,
        config: cfg.to_map(),
    })
}

fn fixed_seeds(res: &Resources, gold: &GoldSet, cfg: &EvalConfig) -> Result<Vec<(SeedSet, Vec<String>)>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| sample_seeds(res, gold, cfg.expand.method, cfg.seed_size, cfg.rng_seed, t))
        .collect()
}

fn map_with_seeds(
    res: &Resources,
    gold: &GoldSet,
    cfg: &ExpandConfig,
    seeds: &[(SeedSet, Vec<String>)],
) -> Result<f64> {
    let aps = seeds
        .par_iter()
        .enumerate()
        .map(|(t, (s, r))| score_trial(res, gold, gold, cfg, t, s, r.clone()).map(|r| r.ap))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(aps))
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "set: {}  method: {}  top_n: {}", self.set, self.method, self.top_n).unwrap();
        if let Some(c) = self.cutoff {
            writeln!(out, "cutoff: {c}").unwrap();
        }
        let width = self.trials.iter().map(|t| t.seeds.join(", ").len()).max().unwrap_or(5).max(5);
        writeln!(out, "{:>5}  {:<width$}  {:>6}", "trial", "seeds", "AP").unwrap();
        for t in &self.trials {
            writeln!(out, "{:>5}  {:<width$}  {:>6.3}", t.trial, t.seeds.join(", "), t.ap).unwrap();
        }
        writeln!(out, "{:>5}  {:<width$}  {:>6.3}", "MAP", "", self.map).unwrap();
        out
    }
}

/// Mean AP for every (sentences, patterns) cell, with the same seeds in
/// every cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub set: String,
    pub method: Method,
    pub sentences: Vec<usize>,
    pub patterns: Vec<usize>,
    /// `cells[p][s]` for `patterns[p]` and `sentences[s]`; `None` where the
    /// pattern count exceeds the available candidates.
    pub cells: Vec<Vec<Option<f64>>>,
    pub seeds: Vec<Vec<String>>,
    pub config: BTreeMap<String, String>,
}

pub fn grid_experiment(
    res: &Resources,
    gold: &GoldSet,
    sentences: &[usize],
    patterns: &[usize],
    cfg: &EvalConfig,
) -> Result<GridReport> {
    if sentences.is_empty() || patterns.is_empty() || sentences.contains(&0) || patterns.contains(&0) {
        return Err(EvalError::Config("grid axes must be non-empty lists of positive counts".into()).into());
    }
    let seeds = fixed_seeds(res, gold, cfg)?;
    let mut cells = Vec::with_capacity(patterns.len());
    for &patt in patterns {
        let mut row = Vec::with_capacity(sentences.len());
        for &sent in sentences {
            let cell = ExpandConfig { sentences: sent, patterns: patt, ..cfg.expand.clone() };
            if cell.mining(cfg.seed_size).validate(cfg.seed_size).is_err() {
                row.push(None);
                continue;
            }
            row.push(Some(map_with_seeds(res, gold, &cell, &seeds)?));
        }
        cells.push(row);
    }
    Ok(GridReport {
        set: gold.name().to_owned(),
        method: cfg.expand.method,
        sentences: sentences.to_vec(),
        patterns: patterns.to_vec(),
        cells,
        seeds: seeds.iter().map(|(s, _)| s.strings()).collect(),
        config: cfg.to_map(),
    })
}

impl GridReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "set: {}  method: {}", self.set, self.method).unwrap();
        write!(out, "{:>12}", "patt\\sent").unwrap();
        for s in &self.sentences {
            write!(out, "  {s:>6}").unwrap();
        }
        writeln!(out).unwrap();
        for (p, row) in self.patterns.iter().zip(&self.cells) {
            write!(out, "{p:>12}").unwrap();
            for c in row {
                match c {
                    Some(v) => write!(out, "  {v:>6.3}").unwrap(),
                    None => write!(out, "  {:>6}", "NA").unwrap(),
                }
            }
            writeln!(out).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub set: String,
    pub method: Method,
    pub q_values: Vec<usize>,
    pub map: Vec<f64>,
    pub seeds: Vec<Vec<String>>,
    pub config: BTreeMap<String, String>,
}

/// Mean AP of a similarity expander for each `q`, with fixed seeds.
pub fn q_sweep(res: &Resources, gold: &GoldSet, q_values: &[usize], cfg: &EvalConfig) -> Result<SweepReport> {
    if !cfg.expand.method.uses_similarity() {
        return Err(EvalError::Config(format!("q only affects mpb2 and mpb2o, not {}", cfg.expand.method)).into());
    }
    if q_values.is_empty() || q_values.contains(&0) {
        return Err(EvalError::Config("q values must be a non-empty list of positive counts".into()).into());
    }
    let seeds = fixed_seeds(res, gold, cfg)?;
    let map = q_values
        .iter()
        .map(|&q| map_with_seeds(res, gold, &ExpandConfig { q, ..cfg.expand.clone() }, &seeds))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        set: gold.name().to_owned(),
        method: cfg.expand.method,
        q_values: q_values.to_vec(),
        map,
        seeds: seeds.iter().map(|(s, _)| s.strings()).collect(),
        config: cfg.to_map(),
    })
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "set: {}  method: {}", self.set, self.method).unwrap();
        writeln!(out, "{:>6}  {:>6}", "q", "MAP").unwrap();
        for (q, m) in self.q_values.iter().zip(&self.map) {
            writeln!(out, "{q:>6}  {m:>6.3}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedTrial {
    pub trial: usize,
    pub seeds: Vec<String>,
    pub subset_ap: f64,
    pub superset_ap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subset: String,
    pub superset: String,
    pub method: Method,
    pub trials: Vec<PairedTrial>,
    pub subset_map: f64,
    pub superset_map: f64,
    pub config: BTreeMap<String, String>,
}

/// Seeds drawn from `subset`; each expansion is scored against both sets.
/// Oracle candidates, when the method uses them, come from the superset.
pub fn subset_experiment(
    res: &Resources,
    subset: &GoldSet,
    superset: &GoldSet,
    cfg: &EvalConfig,
) -> Result<SubsetReport> {
    subset.check_subset_of(superset)?;
    let seeds = fixed_seeds(res, subset, cfg)?;
    let trials = seeds
        .par_iter()
        .enumerate()
        .map(|(t, (s, _))| {
            let top_n = trial_top_n(&cfg.expand, superset);
            let exp = expand(res, s, &cfg.expand, Some(superset), top_n)
                .map_err(|e| Error::Trial { trial: t, source: Box::new(e) })?;
            Ok(PairedTrial {
                trial: t,
                seeds: s.strings(),
                subset_ap: average_precision(exp.terms(), subset, subset.cutoff()),
                superset_ap: average_precision(exp.terms(), superset, superset.cutoff()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubsetReport {
        subset: subset.name().to_owned(),
        superset: superset.name().to_owned(),
        method: cfg.expand.method,
        subset_map: mean(trials.iter().map(|t| t.subset_ap)),
        superset_map: mean(trials.iter().map(|t| t.superset_ap)),
        trials,
        config: cfg.to_map(),
    })
}

impl SubsetReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "method: {}", self.method).unwrap();
        let (a, b) = (self.subset.len().max(6), self.superset.len().max(6));
        writeln!(out, "{:>5}  {:>a$}  {:>b$}  seeds", "trial", self.subset, self.superset).unwrap();
        for t in &self.trials {
            writeln!(out, "{:>5}  {:>a$.3}  {:>b$.3}  {}", t.trial, t.subset_ap, t.superset_ap, t.seeds.join(", "))
                .unwrap();
        }
        writeln!(out, "{:>5}  {:>a$.3}  {:>b$.3}", "MAP", self.subset_map, self.superset_map).unwrap();
        out
    }
}
