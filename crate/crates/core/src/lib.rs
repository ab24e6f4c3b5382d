//! Term set expansion driven by masked language model patterns.
//!
//! Given a handful of seed terms, the crate mines *indicative* masked
//! patterns from a sentence corpus (sentences where every seed is a
//! high-ranked completion of the masked slot) and uses them to grow the seed
//! set in one of two ways:
//!
//! * [`mpb1`] scores every vocabulary item of the language model by a
//!   weighted product of experts over the indicative patterns.
//! * [`mpb2`] scores arbitrary (possibly multi-word) candidate terms by how
//!   similar the patterns around their corpus occurrences are to the
//!   indicative ones, where similarity is the overlap of top-q completions.
//!
//! Candidate terms for the second route come from a plain embedding
//! neighbourhood search ([`candidates`]), which doubles as a baseline. The
//! [`eval`] module holds the gold-set loader, average precision, and the
//! experiment drivers.
//!
//! The language model is reached through the [`mlm::MlmBackend`] trait. The
//! crate ships a deterministic in-process mock ([`mlm::MockLm`]), an HTTP
//! client for the fill-mask wire protocol ([`mlm::HttpBackend`]) and a small
//! server that exposes any backend over that protocol ([`mlm::server`]).
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod candidates;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod expansion;
pub mod mining;
pub mod mlm;
pub mod mpb1;
pub mod mpb2;
pub mod pattern;
pub mod run;
pub mod synthetic;
pub mod term;

pub use candidates::{CandidateSet, EmbeddingTable};
pub use corpus::{CorpusIndex, Occurrence, Sentence, TokenizerConfig};
pub use error::{Error, Result};
pub use eval::{EvalReport, GoldSet};
pub use expansion::{Expansion, Method, ScoredTerm};
pub use mining::{IndicativePatternSet, MiningConfig, ScoredPattern, SeedSet};
pub use mlm::{CompletionResult, MlmBackend, RankLookup};
pub use pattern::{MaskedPattern, MASK};
pub use term::Term;
