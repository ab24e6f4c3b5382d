use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::{BackendInfo, CompletionResult, MlmBackend, MlmError, RankLookup};
use crate::pattern::MaskedPattern;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
struct CacheKey {
    backend: String,
    tokens: Vec<String>,
    mask_index: usize,
    top_q: usize,
    terms: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: CacheKey,
    result: CompletionResult,
    lookup: RankLookup,
}

type Entry = Arc<(CompletionResult, RankLookup)>;

/// Memoizing wrapper around a backend.
///
/// Responses are keyed by backend id, pattern, `top_q` and the requested
/// terms. Reads take a shared lock; inserts take the write lock briefly.
/// Two threads missing the same key may both query the backend, which is
/// harmless since backends are deterministic.
pub struct CachedBackend<B> {
    inner: B,
    entries: RwLock<HashMap<CacheKey, Entry>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl<B: MlmBackend> CachedBackend<B> {
    pub fn new(inner: B) -> Self {
        CachedBackend {
            inner,
            entries: RwLock::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (hits, misses) since construction.
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }

    /// Merge entries from a cache file written by [`CachedBackend::save`].
    /// A missing file is not an error.
    pub fn load(&self, path: &Path) -> io::Result<usize> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e),
        };
        let mut entries = self.entries.write();
        let mut n = 0;
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: CacheLine = serde_json::from_str(&line).map_err(io::Error::other)?;
            entries.insert(parsed.key, Arc::new((parsed.result, parsed.lookup)));
            n += 1;
        }
        Ok(n)
    }

    /// Write every entry as one JSON line, sorted by key.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let entries = self.entries.read();
        let mut keys: Vec<&CacheKey> = entries.keys().collect();
        keys.sort();
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for key in keys {
                let entry = &entries[key];
                let line = CacheLine { key: key.clone(), result: entry.0.clone(), lookup: entry.1.clone() };
                serde_json::to_writer(&mut w, &line).map_err(io::Error::other)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        std::fs::rename(tmp, path)
    }
}

impl<B: MlmBackend> MlmBackend for CachedBackend<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn info(&self) -> Result<BackendInfo, MlmError> {
        self.inner.info()
    }

    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms_of_interest: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        let key = CacheKey {
            backend: self.inner.id().to_owned(),
            tokens: pattern.tokens().to_vec(),
            mask_index: pattern.mask_index(),
            top_q,
            terms: terms_of_interest.to_vec(),
        };
        if let Some(hit) = self.entries.read().get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok((hit.0.clone(), hit.1.clone()));
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let response = self.inner.complete(pattern, top_q, terms_of_interest)?;
        self.entries.write().insert(key, Arc::new(response.clone()));
        Ok(response)
    }

    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        self.inner.contains(term)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::{MockLm, TemplateSpec, WorldSpec};

    fn lm() -> MockLm {
        MockLm::build(&WorldSpec {
            id: "c".into(),
            smoothing: 0.1,
            max_context: 64,
            categories: vec![],
            extra_terms: vec!["a".into(), "b".into(), "c".into()],
            templates: vec![TemplateSpec { text: "x {} y".into(), weights: [("b".to_string(), 2.0)].into() }],
        })
        .unwrap()
    }

    fn pat() -> MaskedPattern {
        MaskedPattern::new(vec!["x".into(), crate::MASK.into(), "y".into()], 1).unwrap()
    }

    #[test]
    fn second_query_hits() {
        let cache = CachedBackend::new(lm());
        let a = cache.complete(&pat(), 2, &["a".into()]).unwrap();
        let b = cache.complete(&pat(), 2, &["a".into()]).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.stats(), (1, 1));
        cache.complete(&pat(), 3, &["a".into()]).unwrap();
        assert_eq!(cache.stats(), (1, 2));
    }

    #[test]
    fn persists_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let cache = CachedBackend::new(lm());
        cache.complete(&pat(), 3, &[]).unwrap();
        cache.complete(&pat(), 1, &["c".into()]).unwrap();
        cache.save(&path).unwrap();
        let first = std::fs::read(&path).unwrap();

        let warm = CachedBackend::new(lm());
        assert_eq!(warm.load(&path).unwrap(), 2);
        warm.complete(&pat(), 3, &[]).unwrap();
        assert_eq!(warm.stats(), (1, 0));
        warm.save(&path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
        assert_eq!(CachedBackend::new(lm()).load(&dir.path().join("absent")).unwrap(), 0);
    }
}
