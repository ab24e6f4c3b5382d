//! Command pipelines behind the `termset` binary.
//!
//! Every artifact records the resolved configuration it was produced with:
//! JSON artifacts under a `config` key, JSON-lines artifacts in their
//! header line, and the corpus index in `# key=value` lines.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::candidates::{CandidateSet, EmbeddingTable, LoadOptions};
use crate::config::{Command, RunConfig};
use crate::corpus::{CorpusIndex, TokenizerConfig};
use crate::error::{Error, Result};
use crate::eval::{self, default_top_n, GoldSet, Resources};
use crate::expansion::Method;
use crate::mining::{mine, IndicativePatternSet, SeedSet};
use crate::mlm::{CachedBackend, ClientConfig, HttpBackend, MlmBackend, MockLm};

pub const INDEX_FILE: &str = "index.tsi";
pub const PATTERNS_FILE: &str = "patterns.jsonl";
pub const EXPANSION_FILE: &str = "expansion.jsonl";
const CACHE_FILE: &str = "completions.jsonl";

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path.display().to_string(), e)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_string(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn load_index(cfg: &RunConfig) -> Result<CorpusIndex> {
    if let Some(path) = &cfg.index {
        let f = fs::File::open(path).map_err(io_err(path))?;
        return Ok(CorpusIndex::load(io::BufReader::new(f))?);
    }
    let path = cfg.corpus.as_ref().expect("validated: corpus or index");
    let f = fs::File::open(path).map_err(io_err(path))?;
    let index = CorpusIndex::build(io::BufReader::new(f), TokenizerConfig { lowercase: cfg.lowercase })?;
    log::info!(
        "indexed {} sentences, {} tokens, {} distinct",
        index.sentence_count(),
        index.token_count(),
        index.vocabulary_size()
    );
    Ok(index)
}

/// The configured backend behind a completion cache, preloaded from the
/// cache directory when one is set.
pub fn open_backend(cfg: &RunConfig) -> Result<CachedBackend<Box<dyn MlmBackend>>> {
    let inner: Box<dyn MlmBackend> = match (&cfg.world, &cfg.endpoint) {
        (Some(world), _) => Box::new(MockLm::from_file(world)?),
        (None, Some(url)) => Box::new(HttpBackend::connect(
            url,
            ClientConfig { max_in_flight: cfg.max_in_flight, ..Default::default() },
        )?),
        (None, None) => unreachable!("validated: world or endpoint"),
    };
    let cached = CachedBackend::new(inner);
    if let Some(dir) = &cfg.cache_dir {
        let path = dir.join(CACHE_FILE);
        let n = cached.load(&path).map_err(io_err(&path))?;
        log::info!("loaded {n} cached completions");
    }
    Ok(cached)
}

fn save_cache<B: MlmBackend>(cfg: &RunConfig, backend: &CachedBackend<B>) -> Result<()> {
    if let Some(dir) = &cfg.cache_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(CACHE_FILE);
        backend.save(&path).map_err(io_err(&path))?;
        let (hits, misses) = backend.stats();
        log::info!("completion cache: {hits} hits, {misses} misses");
    }
    Ok(())
}

fn load_embeddings(cfg: &RunConfig) -> Result<Option<EmbeddingTable>> {
    let Some(path) = &cfg.embeddings else { return Ok(None) };
    let opts = LoadOptions { tag_separator: cfg.tag_separator, underscores_as_spaces: cfg.underscores };
    let table = EmbeddingTable::load(path, &opts)?;
    log::info!("loaded {} embeddings of dimension {}", table.len(), table.dim());
    Ok(Some(table))
}

fn load_candidates(cfg: &RunConfig) -> Result<Option<CandidateSet>> {
    let Some(path) = &cfg.candidates_file else { return Ok(None) };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(Some(CandidateSet::from_terms(
        text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')),
    )))
}

fn load_patterns(cfg: &RunConfig) -> Result<Option<IndicativePatternSet>> {
    let Some(path) = &cfg.patterns_file else { return Ok(None) };
    let f = fs::File::open(path).map_err(io_err(path))?;
    Ok(Some(IndicativePatternSet::read_jsonl(io::BufReader::new(f))?))
}

fn load_gold(path: &Option<PathBuf>) -> Result<Option<GoldSet>> {
    path.as_ref().map(|p| GoldSet::load(p).map_err(Error::from)).transpose()
}

fn json_with_config<T: serde::Serialize>(value: &T, config: &BTreeMap<String, String>) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    v["config"] = serde_json::to_value(config).expect("map serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

fn text_with_config(body: &str, config: &BTreeMap<String, String>) -> String {
    let mut s: String = config.iter().map(|(k, v)| format!("# {k}={v}\n")).collect();
    s.push_str(body);
    s
}

/// Run `command`, writing artifacts into `out`. Returns the files written.
pub fn execute(command: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate_for(command)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let config = cfg.to_map();
    let mut written = Vec::new();

    if command == Command::Index {
        let index = load_index(cfg)?;
        let path = out.join(INDEX_FILE);
        let mut w = create(&path)?;
        index.save(&mut w, &config)?;
        w.flush().map_err(io_err(&path))?;
        written.push(path);
        return Ok(written);
    }

    let method = cfg.method();
    let need_corpus = command == Command::Mine || method != Method::S2v;
    let index = if need_corpus { Some(load_index(cfg)?) } else { None };
    let need_lm = command == Command::Mine || method.uses_lm();
    let backend = if need_lm { Some(open_backend(cfg)?) } else { None };
    let embeddings = load_embeddings(cfg)?;
    let candidates = load_candidates(cfg)?;
    let patterns = load_patterns(cfg)?;
    let res = Resources {
        backend: backend.as_ref().map(|b| b as &dyn MlmBackend),
        index: index.as_ref(),
        embeddings: embeddings.as_ref(),
        candidates: candidates.as_ref(),
        patterns: patterns.as_ref(),
    };

    let result = run_command(command, cfg, &res, &config, out, &mut written);
    if let Some(b) = &backend {
        save_cache(cfg, b)?;
    }
    result.map(|()| written)
}

fn run_command(
    command: Command,
    cfg: &RunConfig,
    res: &Resources,
    config: &BTreeMap<String, String>,
    out: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let mut emit = |name: &str, text: String| -> Result<()> {
        let path = out.join(name);
        write_string(&path, &text)?;
        written.push(path);
        Ok(())
    };
    match command {
        Command::Index => unreachable!("handled by execute"),
        Command::Mine => {
            let seeds = SeedSet::new(&cfg.seeds)?;
            let backend = res.backend.expect("opened for mine");
            let index = res.index.expect("loaded for mine");
            let set = mine(backend, index, &seeds, &cfg.eval.expand.mining(seeds.len()))?;
            let mut buf = format!("# {}\n", serde_json::json!({ "config": config })).into_bytes();
            set.write_jsonl(&mut buf).map_err(io_err(out))?;
            emit(PATTERNS_FILE, String::from_utf8(buf).expect("utf-8 output"))
        }
        Command::Expand => {
            let seeds = SeedSet::new(&cfg.seeds)?;
            let oracle = load_gold(&cfg.oracle_gold)?;
            let top_n = cfg.eval.expand.top_n.unwrap_or_else(|| default_top_n(oracle.as_ref().map_or(0, GoldSet::len)));
            let mut exp = eval::expand(res, &seeds, &cfg.eval.expand, oracle.as_ref(), top_n)?;
            exp.config = config.clone();
            let mut buf = Vec::new();
            exp.write_jsonl(&mut buf).map_err(io_err(out))?;
            emit(EXPANSION_FILE, String::from_utf8(buf).expect("utf-8 output"))
        }
        Command::Evaluate => {
            let gold = load_gold(&cfg.set)?.expect("validated: set");
            let report = eval::evaluate(res, &gold, &cfg.eval)?;
            emit("report.json", json_with_config(&report, config))?;
            emit("report.txt", text_with_config(&report.to_text(), config))
        }
        Command::Grid => {
            let gold = load_gold(&cfg.set)?.expect("validated: set");
            let report = eval::grid_experiment(res, &gold, &cfg.grid_sentences, &cfg.grid_patterns, &cfg.eval)?;
            emit("grid.json", json_with_config(&report, config))?;
            emit("grid.txt", text_with_config(&report.to_text(), config))
        }
        Command::SweepQ => {
            let gold = load_gold(&cfg.set)?.expect("validated: set");
            let report = eval::q_sweep(res, &gold, &cfg.q_values, &cfg.eval)?;
            emit("sweep.json", json_with_config(&report, config))?;
            emit("sweep.txt", text_with_config(&report.to_text(), config))
        }
        Command::Subset => {
            let subset = load_gold(&cfg.set)?.expect("validated: set");
            let superset = load_gold(&cfg.superset)?.expect("validated: superset");
            let report = eval::subset_experiment(res, &subset, &superset, &cfg.eval)?;
            emit("subset.json", json_with_config(&report, config))?;
            emit("subset.txt", text_with_config(&report.to_text(), config))
        }
    }
}
