//! Run configuration: a flat `key = value` map, resolved into typed
//! settings with method-dependent defaults.
//!
//! The same keys are accepted in config files and as command-line flags
//! (`--key value`). The resolved map is written into every artifact, and
//! any artifact header can be read back as a config file.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::eval::{EvalConfig, ExpandConfig};
use crate::expansion::Method;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  - {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<String>),
    #[error("config line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Every key the configuration understands.
pub const KEYS: &[&str] = &[
    "cache-dir",
    "candidates",
    "candidates-file",
    "corpus",
    "diversity",
    "embeddings",
    "endpoint",
    "fallback-top-q",
    "freq-cap",
    "grid-patterns",
    "grid-sentences",
    "index",
    "lowercase",
    "max-in-flight",
    "max-occ",
    "max-rank-cap",
    "method",
    "oracle-gold",
    "patterns",
    "patterns-file",
    "q",
    "q-values",
    "rng",
    "seed-size",
    "seeds",
    "sentences",
    "set",
    "superset",
    "tag-separator",
    "top-n",
    "trials",
    "underscores",
    "world",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Index,
    Mine,
    Expand,
    Evaluate,
    Grid,
    SweepQ,
    Subset,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Index => "index",
            Command::Mine => "mine",
            Command::Expand => "expand",
            Command::Evaluate => "evaluate",
            Command::Grid => "grid",
            Command::SweepQ => "sweep-q",
            Command::Subset => "subset",
        })
    }
}

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: i + 1,
            detail: format!("expected key = value, got {t:?}"),
        })?;
        map.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(map)
}

fn config_from_json(v: &Value) -> Option<BTreeMap<String, String>> {
    let obj = v.get("config")?.as_object()?;
    Some(
        obj.iter()
            .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_owned)))
            .collect(),
    )
}

/// Read a config file: `key = value` text, a JSON report with a `config`
/// object, or a JSON-lines artifact whose header line (optionally behind
/// `# `) has one.
pub fn load_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    if let Ok(v) = serde_json::from_str::<Value>(&text) {
        if let Some(m) = config_from_json(&v) {
            return Ok(m);
        }
    }
    if let Some(first) = text.lines().next() {
        let first = first.strip_prefix("# ").unwrap_or(first);
        if let Ok(v) = serde_json::from_str::<Value>(first) {
            if let Some(m) = config_from_json(&v) {
                return Ok(m);
            }
        }
    }
    parse_kv(&text)
}

/// Fully resolved settings for one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub lowercase: bool,
    pub world: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub max_in_flight: usize,
    pub seeds: Vec<String>,
    pub patterns_file: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub tag_separator: Option<char>,
    pub underscores: bool,
    pub candidates_file: Option<PathBuf>,
    pub oracle_gold: Option<PathBuf>,
    pub set: Option<PathBuf>,
    pub superset: Option<PathBuf>,
    pub eval: EvalConfig,
    pub grid_sentences: Vec<usize>,
    pub grid_patterns: Vec<usize>,
    pub q_values: Vec<usize>,
    pub cache_dir: Option<PathBuf>,
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str).filter(|v| !v.is_empty() && *v != "none")
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{key}: cannot parse {raw:?}: {e}"));
                None
            }
        }
    }

    fn positive(&mut self, key: &str, default: usize) -> usize {
        match self.parse::<usize>(key) {
            Some(0) => {
                self.errors.push(format!("{key}: must be positive"));
                default
            }
            Some(v) => v,
            None => default,
        }
    }

    fn opt_positive(&mut self, key: &str, default: Option<usize>) -> Option<usize> {
        if self.map.get(key).is_some_and(|v| v == "none") {
            return None;
        }
        match self.parse::<usize>(key) {
            Some(0) => {
                self.errors.push(format!("{key}: must be positive"));
                default
            }
            Some(v) => Some(v),
            None => default,
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    fn list(&mut self, key: &str, default: &[usize]) -> Vec<usize> {
        let Some(raw) = self.raw(key) else {
            return default.to_vec();
        };
        let parsed: Result<Vec<usize>, _> = raw.split(',').map(|s| s.trim().parse::<usize>()).collect();
        match parsed {
            Ok(v) if !v.is_empty() && !v.contains(&0) => v,
            _ => {
                self.errors.push(format!("{key}: expected a comma-separated list of positive counts, got {raw:?}"));
                default.to_vec()
            }
        }
    }

    fn flag(&mut self, key: &str, default: bool) -> bool {
        self.parse::<bool>(key).unwrap_or(default)
    }
}

impl RunConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut r = Reader { map, errors: Vec::new() };
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) {
                r.errors.push(format!("unknown key {k:?}"));
            }
        }
        let method = match r.raw("method") {
            None => Method::Mpb1,
            Some(m) => m.parse().unwrap_or_else(|e: crate::expansion::UnknownMethod| {
                r.errors.push(format!("method: {e}"));
                Method::Mpb1
            }),
        };
        let d = ExpandConfig::for_method(method);
        let diversity = r.parse::<f64>("diversity").unwrap_or(d.diversity_fraction);
        if !(diversity > 0.0 && diversity <= 1.0) {
            r.errors.push(format!("diversity: {diversity} is not in (0, 1]"));
        }
        let expand = ExpandConfig {
            method,
            sentences: r.positive("sentences", d.sentences),
            patterns: r.positive("patterns", d.patterns),
            diversity_fraction: diversity,
            max_rank_cap: r.opt_positive("max-rank-cap", d.max_rank_cap),
            q: r.positive("q", d.q),
            max_occurrences: r.positive("max-occ", d.max_occurrences),
            candidates: r.opt_positive("candidates", d.candidates),
            freq_cap: r.opt_positive("freq-cap", d.freq_cap),
            top_n: r.opt_positive("top-n", d.top_n),
            fallback_top_q: r.opt_positive("fallback-top-q", d.fallback_top_q),
        };
        let defaults = EvalConfig::new(method);
        let eval = EvalConfig {
            trials: r.positive("trials", defaults.trials),
            seed_size: r.positive("seed-size", defaults.seed_size),
            rng_seed: r.parse("rng").unwrap_or(defaults.rng_seed),
            expand,
        };
        let tag_separator = match r.raw("tag-separator") {
            None => None,
            Some(s) if s.chars().count() == 1 => s.chars().next(),
            Some(s) => {
                r.errors.push(format!("tag-separator: expected one character, got {s:?}"));
                None
            }
        };
        let seeds: Vec<String> = r
            .raw("seeds")
            .map(|s| s.split(',').map(|t| t.trim().to_owned()).filter(|t| !t.is_empty()).collect())
            .unwrap_or_default();
        let cfg = RunConfig {
            corpus: r.path("corpus"),
            index: r.path("index"),
            lowercase: r.flag("lowercase", true),
            world: r.path("world"),
            endpoint: r.raw("endpoint").map(str::to_owned),
            max_in_flight: r.positive("max-in-flight", 8),
            seeds,
            patterns_file: r.path("patterns-file"),
            embeddings: r.path("embeddings"),
            tag_separator,
            underscores: r.flag("underscores", false),
            candidates_file: r.path("candidates-file"),
            oracle_gold: r.path("oracle-gold"),
            set: r.path("set"),
            superset: r.path("superset"),
            eval,
            grid_sentences: r.list("grid-sentences", &[20, 100, 500, 1000, 2000]),
            grid_patterns: r.list("grid-patterns", &[10, 20, 40, 80, 160]),
            q_values: r.list("q-values", &[1, 5, 10, 20, 50, 100]),
            cache_dir: r.path("cache-dir"),
        };
        if r.errors.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(r.errors))
        }
    }

    pub fn method(&self) -> Method {
        self.eval.expand.method
    }

    /// Check that everything `command` needs is present, reporting every
    /// problem at once.
    pub fn validate_for(&self, command: Command) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let method = self.method();
        let need_corpus = command != Command::Index && method != Method::S2v || command == Command::Mine;
        if command == Command::Index && self.corpus.is_none() {
            errors.push("index: corpus is required".to_owned());
        }
        if need_corpus && command != Command::Index && self.corpus.is_none() && self.index.is_none() {
            errors.push(format!("{command}: corpus or index is required for method {method}"));
        }
        let need_lm = command == Command::Mine || command != Command::Index && method.uses_lm();
        if need_lm {
            match (&self.world, &self.endpoint) {
                (None, None) => errors.push(format!("{command}: world or endpoint is required for method {method}")),
                (Some(_), Some(_)) => errors.push("world and endpoint are mutually exclusive".to_owned()),
                _ => {}
            }
        }
        if matches!(command, Command::Mine | Command::Expand) && self.seeds.is_empty() {
            errors.push(format!("{command}: seeds are required"));
        }
        if matches!(command, Command::Evaluate | Command::Grid | Command::SweepQ | Command::Subset) && self.set.is_none() {
            errors.push(format!("{command}: set is required"));
        }
        if command == Command::Subset && self.superset.is_none() {
            errors.push("subset: superset is required".to_owned());
        }
        if command == Command::SweepQ && !method.uses_similarity() {
            errors.push(format!("sweep-q: method must be mpb2 or mpb2o, got {method}"));
        }
        if command == Command::Grid && !matches!(method, Method::Mpb1 | Method::Bb | Method::Mpb2 | Method::Mpb2o) {
            errors.push(format!("grid: method {method} does not mine patterns"));
        }
        let expanding = !matches!(command, Command::Index | Command::Mine);
        if expanding {
            match method {
                Method::S2v if self.embeddings.is_none() => errors.push("s2v: embeddings are required".to_owned()),
                Method::Mpb2 if self.embeddings.is_none() && self.candidates_file.is_none() => {
                    errors.push("mpb2: embeddings or candidates-file is required".to_owned())
                }
                Method::Mpb2 | Method::Mpb2o
                    if self.embeddings.is_some()
                        && self.candidates_file.is_none()
                        && self.eval.expand.candidates.is_none() =>
                {
                    errors.push(format!("{method}: candidates (number of embedding neighbours) is required"))
                }
                Method::Mpb2o if command == Command::Expand && self.oracle_gold.is_none() => {
                    errors.push("mpb2o: oracle-gold is required".to_owned())
                }
                _ => {}
            }
        }
        if matches!(command, Command::Mine | Command::Expand) && !self.seeds.is_empty() {
            let k = self.seeds.len();
            if let Err(e) = self.eval.expand.mining(k).validate(k) {
                if method != Method::S2v {
                    errors.push(e.to_string());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// The resolved configuration as written into artifacts.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        for (k, v) in [
            ("corpus", path(&self.corpus)),
            ("index", path(&self.index)),
            ("world", path(&self.world)),
            ("endpoint", self.endpoint.clone()),
            ("patterns-file", path(&self.patterns_file)),
            ("embeddings", path(&self.embeddings)),
            ("candidates-file", path(&self.candidates_file)),
            ("oracle-gold", path(&self.oracle_gold)),
            ("set", path(&self.set)),
            ("superset", path(&self.superset)),
            ("tag-separator", self.tag_separator.map(String::from)),
        ] {
            if let Some(v) = v {
                put(k, v);
            }
        }
        if !self.seeds.is_empty() {
            put("seeds", self.seeds.join(","));
        }
        put("lowercase", self.lowercase.to_string());
        put("underscores", self.underscores.to_string());
        let opt = |v: Option<usize>| v.map_or_else(|| "none".to_owned(), |v| v.to_string());
        let e = &self.eval.expand;
        put("method", e.method.to_string());
        put("sentences", e.sentences.to_string());
        put("patterns", e.patterns.to_string());
        put("diversity", e.diversity_fraction.to_string());
        put("max-rank-cap", opt(e.max_rank_cap));
        put("q", e.q.to_string());
        put("max-occ", e.max_occurrences.to_string());
        put("candidates", opt(e.candidates));
        put("freq-cap", opt(e.freq_cap));
        put("top-n", opt(e.top_n));
        put("fallback-top-q", opt(e.fallback_top_q));
        put("trials", self.eval.trials.to_string());
        put("seed-size", self.eval.seed_size.to_string());
        put("rng", self.eval.rng_seed.to_string());
        put("grid-sentences", join(&self.grid_sentences));
        put("grid-patterns", join(&self.grid_patterns));
        put("q-values", join(&self.q_values));
        m
    }
}
