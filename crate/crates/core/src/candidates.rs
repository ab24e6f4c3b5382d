//! Candidate terms from an embedding neighbourhood.
//!
//! The mean of the seed vectors is used as a query and the closest table
//! entries by cosine similarity become candidates. Ranked on its own, the
//! neighbour list is also a baseline expander.

use std::collections::HashMap;
use std::io::{self, BufRead};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::expansion::{Expansion, Method};
use crate::mining::SeedSet;
use crate::term::normalize;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("seed term {0:?} is not in the embedding table")]
    MissingSeed(String),
    #[error("embedding table line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error("vector dimension {got} does not match table dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("embedding table is empty")]
    Empty,
    #[error("query vector has zero norm")]
    ZeroQuery,
    #[error("neighbour count must be positive")]
    ZeroCount,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Strip everything from this character on, e.g. `|` for `duck|noun`.
    pub tag_separator: Option<char>,
    /// Read `_` in terms as a space, for tables that join multi-word terms.
    pub underscores_as_spaces: bool,
}

/// Dense term vectors, in file order.
///
/// File format: one entry per line, `term TAB v1 v2 ... vd`, optionally
/// followed by `TAB frequency-rank`. An optional first line `count dim`
/// is accepted. Terms are normalized on load; when two lines normalize to
/// the same term the first one wins.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    terms: Vec<String>,
    vectors: Vec<f32>,
    norms: Vec<f64>,
    freq_rank: Vec<usize>,
    ids: HashMap<String, usize>,
}

/// Cosine similarity as used for all neighbour searches: `f64` dot product
/// accumulated in index order, divided by the product of the two norms.
pub fn cosine(query: &[f64], query_norm: f64, v: &[f32], v_norm: f64) -> f64 {
    let dot: f64 = query.iter().zip(v).map(|(q, x)| q * f64::from(*x)).sum();
    dot / (query_norm * v_norm)
}

pub fn norm(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl EmbeddingTable {
    /// Build from `(term, vector, frequency rank)` rows. Rows without a
    /// rank get their position in the input.
    pub fn from_rows<I>(rows: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f32>, Option<usize>)>,
    {
        let mut table = EmbeddingTable {
            dim: 0,
            terms: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            freq_rank: Vec::new(),
            ids: HashMap::new(),
        };
        for (i, (term, v, rank)) in rows.into_iter().enumerate() {
            table.push(term, v, rank.unwrap_or(i + 1))?;
        }
        if table.terms.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        Ok(table)
    }

    fn push(&mut self, term: String, v: Vec<f32>, rank: usize) -> Result<(), EmbeddingError> {
        if self.terms.is_empty() {
            self.dim = v.len();
        }
        if v.len() != self.dim || v.is_empty() {
            return Err(EmbeddingError::Dimension { expected: self.dim, got: v.len() });
        }
        if self.ids.contains_key(&term) {
            return Ok(());
        }
        self.ids.insert(term.clone(), self.terms.len());
        self.norms.push(norm(v.iter().map(|&x| f64::from(x))));
        self.terms.push(term);
        self.vectors.extend(v);
        self.freq_rank.push(rank);
        Ok(())
    }

    pub fn read<R: BufRead>(r: R, opts: &LoadOptions) -> Result<Self, EmbeddingError> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fmt = |d: &str| EmbeddingError::Format { line: lineno, detail: d.to_owned() };
            let mut fields = line.split('\t');
            let raw_term = fields.next().unwrap_or_default();
            let Some(values) = fields.next() else {
                if i == 0 && raw_term.split_whitespace().count() == 2 {
                    continue;
                }
                return Err(fmt("expected a tab between term and vector"));
            };
            let v = values
                .split_whitespace()
                .map(str::parse::<f32>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fmt(&e.to_string()))?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(fmt("non-finite vector component"));
            }
            let rank = match fields.next() {
                Some(r) => Some(r.trim().parse::<usize>().map_err(|e| fmt(&e.to_string()))?),
                None => None,
            };
            let mut term = raw_term;
            if let Some(sep) = opts.tag_separator {
                term = term.split(sep).next().unwrap_or(term);
            }
            let term = if opts.underscores_as_spaces { normalize(&term.replace('_', " ")) } else { normalize(term) };
            if term.is_empty() {
                return Err(fmt("empty term"));
            }
            rows.push((term, v, rank));
        }
        Self::from_rows(rows).map_err(|e| match e {
            EmbeddingError::Dimension { expected, got } => EmbeddingError::Format {
                line: 0,
                detail: format!("mixed vector dimensions {expected} and {got}"),
            },
            other => other,
        })
    }

    pub fn load(path: &Path, opts: &LoadOptions) -> Result<Self, EmbeddingError> {
        let f = std::fs::File::open(path)?;
        Self::read(io::BufReader::new(f), opts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn norm_of(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn freq_rank(&self, i: usize) -> usize {
        self.freq_rank[i]
    }

    pub fn get(&self, term: &str) -> Option<&[f32]> {
        self.ids.get(&normalize(term)).map(|&i| self.vector(i))
    }
}

/// Element-wise mean of the seed vectors.
pub fn mean_seed_vector(table: &EmbeddingTable, seeds: &SeedSet) -> Result<Vec<f64>, EmbeddingError> {
    let mut mean = vec![0.0f64; table.dim()];
    for seed in seeds.terms() {
        let v = table.get(seed.as_str()).ok_or_else(|| EmbeddingError::MissingSeed(seed.as_str().to_owned()))?;
        for (m, x) in mean.iter_mut().zip(v) {
            *m += f64::from(*x);
        }
    }
    let k = seeds.len() as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    Ok(mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// `(term, cosine)`, best first, ties by term.
    pub entries: Vec<(String, f64)>,
    /// Entries skipped because their vector has zero norm.
    pub zero_norm_skipped: usize,
    /// Entries inside the frequency cap that were compared.
    pub considered: usize,
}

impl CandidateSet {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Plain list of terms, for feeding an expander from a file or from
    /// other sources.
    pub fn from_terms<I: IntoIterator<Item = S>, S: AsRef<str>>(terms: I) -> Self {
        let mut seen = std::collections::HashSet::new();
        let entries: Vec<(String, f64)> = terms
            .into_iter()
            .map(|t| normalize(t.as_ref()))
            .filter(|t| !t.is_empty() && seen.insert(t.clone()))
            .map(|t| (t, 0.0))
            .collect();
        let considered = entries.len();
        CandidateSet { entries, zero_norm_skipped: 0, considered }
    }
}

fn neighbour_order(a: &(usize, f64), b: &(usize, f64), terms: &[String]) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| terms[a.0].cmp(&terms[b.0]))
}

const SHARD: usize = 4096;

/// The `n` entries most cosine-similar to `query`, optionally restricted to
/// entries with frequency rank at most `freq_cap`.
pub fn top_neighbors(
    table: &EmbeddingTable,
    query: &[f64],
    n: usize,
    freq_cap: Option<usize>,
) -> Result<CandidateSet, EmbeddingError> {
    if n == 0 {
        return Err(EmbeddingError::ZeroCount);
    }
    if query.len() != table.dim() {
        return Err(EmbeddingError::Dimension { expected: table.dim(), got: query.len() });
    }
    let qn = norm(query.iter().copied());
    if qn == 0.0 || !qn.is_finite() {
        return Err(EmbeddingError::ZeroQuery);
    }
    let ids: Vec<usize> = (0..table.len())
        .filter(|&i| freq_cap.is_none_or(|cap| table.freq_rank(i) <= cap))
        .collect();
    let shards: Vec<(Vec<(usize, f64)>, usize)> = ids
        .par_chunks(SHARD)
        .map(|chunk| {
            let mut zero = 0;
            let mut best: Vec<(usize, f64)> = Vec::with_capacity(chunk.len());
            for &i in chunk {
                if table.norm_of(i) == 0.0 {
                    zero += 1;
                    continue;
                }
                best.push((i, cosine(query, qn, table.vector(i), table.norm_of(i))));
            }
            best.sort_by(|a, b| neighbour_order(a, b, table.terms()));
            best.truncate(n);
            (best, zero)
        })
        .collect();
    let zero_norm_skipped: usize = shards.iter().map(|(_, z)| z).sum();
    let mut merged: Vec<(usize, f64)> = shards.into_iter().flat_map(|(b, _)| b).collect();
    merged.sort_by(|a, b| neighbour_order(a, b, table.terms()));
    merged.truncate(n);
    if zero_norm_skipped > 0 {
        log::warn!("{zero_norm_skipped} zero-norm embedding vectors skipped");
    }
    Ok(CandidateSet {
        entries: merged.into_iter().map(|(i, s)| (table.terms()[i].clone(), s)).collect(),
        zero_norm_skipped,
        considered: ids.len(),
    })
}

/// Neighbours of the mean seed vector, as an expansion.
pub fn expand_s2v(
    table: &EmbeddingTable,
    seeds: &SeedSet,
    n: usize,
    freq_cap: Option<usize>,
) -> Result<Expansion, EmbeddingError> {
    let query = mean_seed_vector(table, seeds)?;
    let set = top_neighbors(table, &query, n, freq_cap)?;
    Ok(Expansion::ranked(Method::S2v, set.entries, n).with_meta("zero_norm_skipped", set.zero_norm_skipped))
}
