use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use termset::config::{self, Command, ConfigError, RunConfig};
use termset::corpus::{CorpusIndex, TokenizerConfig};
use termset::mlm::server::{serve, ServerConfig};
use termset::mlm::{conformance, ClientConfig, HttpBackend, MlmBackend, MockLm};
use termset::pattern::MaskedPattern;
use termset::run;
use termset::Error;

#[derive(Parser)]
#[command(name = "termset", version, about = "Grow a seed set of terms using masked language model patterns")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a corpus index file.
    Index(Common),
    /// Mine indicative patterns for the seeds.
    Mine(Common),
    /// Expand the seeds with the configured method.
    Expand(Common),
    /// Mean average precision over random seed sets drawn from a gold set.
    Evaluate(Common),
    /// MAP over a grid of sentence budgets and pattern counts.
    Grid(Common),
    /// MAP over similarity list sizes.
    SweepQ(Common),
    /// Seeds from a subset, scored against subset and superset.
    Subset(Common),
    /// Check a backend against the fill-mask protocol contract.
    Conformance(Common),
    /// Serve a mock world over the fill-mask protocol.
    ServeMock {
        #[arg(long)]
        world: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Config file: `key = value` lines, or any artifact with an embedded config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Setting override, repeatable: `--with max-rank-cap=50`.
    #[arg(long = "with", value_name = "KEY=VALUE")]
    with: Vec<String>,
    #[command(flatten)]
    keys: Keys,
}

/// Flags mirroring config keys; each overrides the config file.
#[derive(Args, Default)]
struct Keys {
    #[arg(long)]
    corpus: Option<String>,
    #[arg(long)]
    index: Option<String>,
    #[arg(long)]
    world: Option<String>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated seed terms.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    sentences: Option<String>,
    #[arg(long)]
    patterns: Option<String>,
    #[arg(long)]
    diversity: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    max_occ: Option<String>,
    #[arg(long)]
    embeddings: Option<String>,
    #[arg(long)]
    candidates: Option<String>,
    #[arg(long)]
    freq_cap: Option<String>,
    #[arg(long)]
    candidates_file: Option<String>,
    #[arg(long)]
    oracle_gold: Option<String>,
    #[arg(long)]
    patterns_file: Option<String>,
    #[arg(long)]
    top_n: Option<String>,
    /// Gold set file.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    superset: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed_size: Option<String>,
    #[arg(long)]
    rng: Option<String>,
    #[arg(long)]
    cache_dir: Option<String>,
}

impl Keys {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("corpus", &self.corpus),
            ("index", &self.index),
            ("world", &self.world),
            ("endpoint", &self.endpoint),
            ("method", &self.method),
            ("seeds", &self.seeds),
            ("sentences", &self.sentences),
            ("patterns", &self.patterns),
            ("diversity", &self.diversity),
            ("q", &self.q),
            ("max-occ", &self.max_occ),
            ("embeddings", &self.embeddings),
            ("candidates", &self.candidates),
            ("freq-cap", &self.freq_cap),
            ("candidates-file", &self.candidates_file),
            ("oracle-gold", &self.oracle_gold),
            ("patterns-file", &self.patterns_file),
            ("top-n", &self.top_n),
            ("set", &self.set),
            ("superset", &self.superset),
            ("trials", &self.trials),
            ("seed-size", &self.seed_size),
            ("rng", &self.rng),
            ("cache-dir", &self.cache_dir),
        ]
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut map = match &self.config {
            Some(p) => config::load_file(p)?,
            None => BTreeMap::new(),
        };
        for (k, v) in self.keys.pairs() {
            if let Some(v) = v {
                map.insert(k.to_owned(), v.clone());
            }
        }
        for kv in &self.with {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::Invalid(vec![format!("--with expects KEY=VALUE, got {kv:?}")]))?;
            map.insert(k.trim().to_owned(), v.trim().to_owned());
        }
        Ok(RunConfig::from_map(&map)?)
    }

    fn init_pool(&self) {
        if let Some(n) = self.workers {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("worker pool already initialized: {e}");
            }
        }
    }
}

fn probes(cfg: &RunConfig) -> Result<Vec<MaskedPattern>, Error> {
    let from_corpus = if cfg.corpus.is_some() || cfg.index.is_some() {
        let index = run::load_index(cfg)?;
        index
            .sentences()
            .iter()
            .filter(|s| s.tokens.len() >= 2)
            .take(10)
            .map(|s| index.mask_occurrence(&termset::Occurrence { sentence: s.id, start: 0, end: 1 }))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    if !from_corpus.is_empty() {
        return Ok(from_corpus);
    }
    let fallback = CorpusIndex::from_sentences(
        ["the capital of france is paris", "she plays the violin every day", "we drove to the coast in june"],
        TokenizerConfig::default(),
    )?;
    (0..fallback.sentence_count())
        .map(|i| fallback.mask_occurrence(&termset::Occurrence { sentence: i, start: 3, end: 4 }))
        .collect::<Result<Vec<_>, _>>()
        .map_err(Error::from)
}

fn conformance_cmd(common: &Common) -> Result<bool, Error> {
    let cfg = common.resolve()?;
    let backend: Box<dyn MlmBackend> = match (&cfg.world, &cfg.endpoint) {
        (Some(w), None) => Box::new(MockLm::from_file(w)?),
        (None, Some(url)) => {
            Box::new(HttpBackend::connect(url, ClientConfig { max_in_flight: cfg.max_in_flight, ..Default::default() })?)
        }
        _ => return Err(ConfigError::Invalid(vec!["conformance: exactly one of world or endpoint is required".into()]).into()),
    };
    let report = conformance::run(&backend, &probes(&cfg)?);
    print!("{report}");
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::Index(c) => (Command::Index, c),
        Cmd::Mine(c) => (Command::Mine, c),
        Cmd::Expand(c) => (Command::Expand, c),
        Cmd::Evaluate(c) => (Command::Evaluate, c),
        Cmd::Grid(c) => (Command::Grid, c),
        Cmd::SweepQ(c) => (Command::SweepQ, c),
        Cmd::Subset(c) => (Command::Subset, c),
        Cmd::Conformance(c) => {
            return match conformance_cmd(c) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    log::error!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
        Cmd::ServeMock { world, addr, threads } => {
            let lm = match MockLm::from_file(world) {
                Ok(lm) => lm,
                Err(e) => {
                    log::error!("{e}");
                    return ExitCode::from(2);
                }
            };
            return match serve(lm, addr, ServerConfig { workers: *threads, ..Default::default() }) {
                Ok(handle) => {
                    println!("{}", handle.url());
                    handle.join();
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    log::error!("cannot serve on {addr}: {e}");
                    ExitCode::from(4)
                }
            };
        }
    };
    common.init_pool();
    let result = common.resolve().and_then(|cfg| run::execute(command, &cfg, &common.out));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
