//! Generated test worlds with planted categories.
//!
//! A world has a few categories of pseudo-word members, context templates
//! that prefer the members of one category, noise templates over random
//! terms, a corpus sampled from the templates, a matching mock LM, gold
//! files, and an embedding table where each category forms a noisy
//! cluster. Everything is a pure function of [`SyntheticConfig`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::candidates::EmbeddingTable;
use crate::corpus::{CorpusIndex, TokenizerConfig};
use crate::eval::GoldSet;
use crate::mlm::{CategorySpec, MockLm, TemplateSpec, WorldSpec, SLOT};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub categories: usize,
    pub members: usize,
    /// Of `members`, how many are two-word terms (out of LM vocabulary).
    pub multiword_members: usize,
    /// Size of a nested subset of the first category; 0 for none.
    pub subset_members: usize,
    pub templates_per_category: usize,
    /// Templates of the first category that only take subset members.
    pub subset_templates: usize,
    /// Fraction of a category's members each of its templates accepts.
    pub coverage: f64,
    pub sentences_per_template: usize,
    pub noise_templates: usize,
    pub noise_template_terms: usize,
    pub noise_terms: usize,
    /// Weight scale every vocabulary term gets in every template.
    pub background: f64,
    pub smoothing: f64,
    pub min_context: usize,
    pub max_context: usize,
    pub embedding_dim: usize,
    /// Standard deviation of member vectors around their category centre
    /// (centres have unit expected norm).
    pub embedding_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            categories: 5,
            members: 30,
            multiword_members: 0,
            subset_members: 10,
            templates_per_category: 12,
            subset_templates: 3,
            coverage: 0.8,
            sentences_per_template: 25,
            noise_templates: 20,
            noise_template_terms: 40,
            noise_terms: 50,
            background: 0.05,
            smoothing: 0.01,
            min_context: 3,
            max_context: 6,
            embedding_dim: 32,
            embedding_noise: 0.8,
        }
    }
}

impl SyntheticConfig {
    /// Default world with three times the noise templates.
    pub fn noisy() -> Self {
        SyntheticConfig { noise_templates: 60, ..Default::default() }
    }
}

pub struct SyntheticWorld {
    pub config: SyntheticConfig,
    pub world: WorldSpec,
    pub sentences: Vec<String>,
    /// One gold set per category, named `set0`, `set1`, ...
    pub golds: Vec<GoldSet>,
    /// Nested subset of `golds[0]`, named `set0-sub`.
    pub subset: Option<GoldSet>,
    /// Embedding rows, most frequent term first.
    pub embeddings: Vec<(String, Vec<f32>)>,
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "st"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "n", "r", "l", "s", "k"];

struct Namer {
    used: BTreeSet<String>,
}

impl Namer {
    fn word(&mut self, rng: &mut ChaCha8Rng, syllables: usize) -> String {
        loop {
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
                w.push_str(CODAS.choose(rng).unwrap());
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn weighted_template(
    rng: &mut ChaCha8Rng,
    text: String,
    preferred: &[String],
    vocab: &[String],
    background: f64,
) -> TemplateSpec {
    let mut weights = BTreeMap::new();
    if background > 0.0 {
        for t in vocab {
            weights.insert(t.clone(), background * rng.gen::<f64>());
        }
    }
    for t in preferred {
        weights.insert(t.clone(), 1.0 + 2.0 * rng.gen::<f64>());
    }
    TemplateSpec { text, weights }
}

fn template_text(rng: &mut ChaCha8Rng, namer: &mut Namer, cfg: &SyntheticConfig) -> String {
    let n = rng.gen_range(cfg.min_context..=cfg.max_context);
    let slot = rng.gen_range(0..=n);
    let mut words: Vec<String> = (0..n).map(|_| namer.word(rng, 2)).collect();
    words.insert(slot, SLOT.to_owned());
    words.join(" ")
}

impl SyntheticWorld {
    pub fn generate(cfg: &SyntheticConfig) -> Self {
        assert!(cfg.categories > 0 && cfg.members > 0, "world needs members");
        assert!(cfg.multiword_members <= cfg.members && cfg.subset_members <= cfg.members);
        assert!(cfg.min_context >= 1 && cfg.min_context <= cfg.max_context);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut namer = Namer { used: BTreeSet::new() };

        let categories: Vec<Vec<String>> = (0..cfg.categories)
            .map(|_| {
                (0..cfg.members)
                    .map(|i| {
                        if i >= cfg.members - cfg.multiword_members {
                            format!("{} {}", namer.word(&mut rng, 2), namer.word(&mut rng, 2))
                        } else {
                            namer.word(&mut rng, 2)
                        }
                    })
                    .collect()
            })
            .collect();
        let noise: Vec<String> = (0..cfg.noise_terms).map(|_| namer.word(&mut rng, 2)).collect();
        let all_terms: Vec<String> = categories.iter().flatten().chain(&noise).cloned().collect();
        let single: Vec<String> = all_terms.iter().filter(|t| !t.contains(' ')).cloned().collect();

        let mut templates = Vec::new();
        for (ci, members) in categories.iter().enumerate() {
            for ti in 0..cfg.templates_per_category {
                let pool: &[String] = if ci == 0 && ti < cfg.subset_templates && cfg.subset_members > 0 {
                    &members[..cfg.subset_members]
                } else {
                    members
                };
                let k = ((pool.len() as f64 * cfg.coverage).round() as usize).clamp(1, pool.len());
                let preferred: Vec<String> = pool.choose_multiple(&mut rng, k).cloned().collect();
                let text = template_text(&mut rng, &mut namer, cfg);
                templates.push(weighted_template(&mut rng, text, &preferred, &single, cfg.background));
            }
        }
        for _ in 0..cfg.noise_templates {
            let k = cfg.noise_template_terms.min(all_terms.len());
            let preferred: Vec<String> = all_terms.choose_multiple(&mut rng, k).cloned().collect();
            let text = template_text(&mut rng, &mut namer, cfg);
            templates.push(weighted_template(&mut rng, text, &preferred, &single, cfg.background));
        }

        let mut sentences = Vec::new();
        let mut freq: HashMap<String, usize> = HashMap::new();
        for t in &templates {
            let (terms, weights): (Vec<&String>, Vec<f64>) = t.weights.iter().unzip();
            let dist = WeightedIndex::new(&weights).expect("positive template weights");
            for _ in 0..cfg.sentences_per_template {
                let term = terms[dist.sample(&mut rng)];
                let s = t.fill(term);
                for w in s.split(' ') {
                    *freq.entry(w.to_owned()).or_default() += 1;
                }
                if term.contains(' ') {
                    *freq.entry(term.clone()).or_default() += 1;
                }
                sentences.push(s);
            }
        }
        sentences.shuffle(&mut rng);

        let embeddings = embed(&mut rng, cfg, &categories, &freq);

        let world = WorldSpec {
            id: format!("synthetic-{}", cfg.seed),
            smoothing: cfg.smoothing,
            max_context: 64,
            categories: categories
                .iter()
                .enumerate()
                .map(|(i, m)| CategorySpec { name: format!("set{i}"), members: m.clone() })
                .collect(),
            extra_terms: noise,
            templates,
        };
        let golds = categories
            .iter()
            .enumerate()
            .map(|(i, m)| GoldSet::new(&format!("set{i}"), m.iter().map(|t| vec![t.as_str()]), false).unwrap())
            .collect();
        let subset = (cfg.subset_members > 0).then(|| {
            GoldSet::new("set0-sub", categories[0][..cfg.subset_members].iter().map(|t| vec![t.as_str()]), false)
                .unwrap()
        });
        SyntheticWorld { config: cfg.clone(), world, sentences, golds, subset, embeddings }
    }

    pub fn index(&self) -> CorpusIndex {
        CorpusIndex::from_sentences(&self.sentences, TokenizerConfig::default()).expect("non-empty corpus")
    }

    pub fn mock(&self) -> MockLm {
        MockLm::build(&self.world).expect("generated world is valid")
    }

    pub fn embedding_table(&self) -> EmbeddingTable {
        EmbeddingTable::from_rows(self.embeddings.iter().map(|(t, v)| (t.clone(), v.clone(), None)))
            .expect("non-empty table")
    }

    /// Write `world.json`, `corpus.txt`, `embeddings.txt` and one gold file
    /// per set under `gold/`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir.join("gold"))?;
        fs::write(dir.join("world.json"), self.world.to_json())?;
        let mut corpus = io::BufWriter::new(fs::File::create(dir.join("corpus.txt"))?);
        for s in &self.sentences {
            writeln!(corpus, "{s}")?;
        }
        corpus.flush()?;
        for g in self.golds.iter().chain(&self.subset) {
            let mut text = format!("# {}\n", g.name());
            for group in g.groups() {
                text.push_str(&group.join("\t"));
                text.push('\n');
            }
            fs::write(dir.join("gold").join(format!("{}.txt", g.name())), text)?;
        }
        let mut emb = io::BufWriter::new(fs::File::create(dir.join("embeddings.txt"))?);
        writeln!(emb, "{} {}", self.embeddings.len(), self.config.embedding_dim)?;
        for (t, v) in &self.embeddings {
            let vals: Vec<String> = v.iter().map(f32::to_string).collect();
            writeln!(emb, "{}\t{}", t.replace(' ', "_"), vals.join(" "))?;
        }
        emb.flush()
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect()
}

fn embed(
    rng: &mut ChaCha8Rng,
    cfg: &SyntheticConfig,
    categories: &[Vec<String>],
    freq: &HashMap<String, usize>,
) -> Vec<(String, Vec<f32>)> {
    let dim = cfg.embedding_dim;
    let unit = 1.0 / (dim as f64).sqrt();
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for members in categories {
        let centre = gaussian(rng, dim, unit);
        for m in members {
            let noise = gaussian(rng, dim, cfg.embedding_noise * unit);
            vectors.insert(m.clone(), centre.iter().zip(noise).map(|(c, n)| c + n).collect());
        }
    }
    let mut others: Vec<&String> = freq.keys().filter(|t| !vectors.contains_key(*t)).collect();
    others.sort();
    for t in others {
        vectors.insert(t.clone(), gaussian(rng, dim, unit));
    }
    let mut rows: Vec<(String, Vec<f32>)> =
        vectors.into_iter().map(|(t, v)| (t, v.into_iter().map(|x| x as f32).collect())).collect();
    rows.sort_by(|a, b| {
        let fa = freq.get(&a.0).copied().unwrap_or(0);
        let fb = freq.get(&b.0).copied().unwrap_or(0);
        fb.cmp(&fa).then_with(|| a.0.cmp(&b.0))
    });
    rows
}
