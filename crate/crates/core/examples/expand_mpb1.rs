//! Expand seeds through weighted LM completions, next to the unselected
//! baseline that uses the first collected patterns.
//!
//! `cargo run --release --example expand_mpb1`

use termset::eval::average_precision;
use termset::mining::{collect_candidates, mine, MiningConfig};
use termset::mpb1::{expand_bb, score_vocab_terms, Mpb1Config};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::SeedSet;

fn main() -> termset::Result<()> {
    let world = SyntheticWorld::generate(&SyntheticConfig::noisy());
    let (index, lm) = (world.index(), world.mock());
    let gold = &world.golds[3];
    let seeds = SeedSet::new(gold.primary_forms().skip(5).take(3))?;
    let cfg = MiningConfig::with_budget(2000, seeds.len(), 40);
    let scoring = Mpb1Config { top_n: 60, fallback_top_q: None };

    let patterns = mine(&lm, &index, &seeds, &cfg)?;
    let mpb1 = score_vocab_terms(&lm, &patterns, &scoring)?;
    let collected = collect_candidates(&index, &seeds, cfg.per_seed_sentences)?;
    let bb = expand_bb(&lm, &collected.candidates, cfg.patterns, &scoring)?;

    println!("seeds: {}", seeds.strings().join(", "));
    for exp in [&mpb1, &bb] {
        let ap = average_precision(exp.terms(), gold, None);
        let head: Vec<&str> = exp.terms().take(8).collect();
        println!("{:<5} AP {ap:.3}  {}", exp.method.as_str(), head.join(" "));
    }

    // A backend that only returns top lists needs an explicit fallback.
    let truncated = world.mock().with_max_top_q(50);
    let fallback = Mpb1Config { top_n: 60, fallback_top_q: Some(50) };
    let approx = score_vocab_terms(&truncated, &patterns, &fallback)?;
    println!("top-50 fallback: AP {:.3}, meta {:?}", average_precision(approx.terms(), gold, None), approx.meta);
    Ok(())
}
