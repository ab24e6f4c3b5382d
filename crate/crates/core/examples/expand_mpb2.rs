//! Score embedding-neighbour candidates, including two-word terms the LM
//! cannot complete, by pattern similarity.
//!
//! `cargo run --release --example expand_mpb2`

use termset::candidates::{expand_s2v, mean_seed_vector, top_neighbors};
use termset::eval::average_precision;
use termset::mining::{mine, MiningConfig};
use termset::mpb2::{expand_mpb2, SimilarityConfig};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::{Method, SeedSet};

fn main() -> termset::Result<()> {
    let world = SyntheticWorld::generate(&SyntheticConfig { multiword_members: 6, ..Default::default() });
    let (index, lm, table) = (world.index(), world.mock(), world.embedding_table());
    let gold = &world.golds[1];
    let seeds = SeedSet::new(gold.primary_forms().filter(|t| !t.contains(' ')).take(3))?;
    println!("seeds: {}", seeds.strings().join(", "));

    let s2v = expand_s2v(&table, &seeds, 60, Some(200_000))?;
    println!("s2v   AP {:.3}", average_precision(s2v.terms(), gold, None));

    let query = mean_seed_vector(&table, &seeds)?;
    let candidates = top_neighbors(&table, &query, 80, Some(200_000))?;
    let patterns = mine(&lm, &index, &seeds, &MiningConfig::with_budget(2000, seeds.len(), 20))?;
    let exp = expand_mpb2(&lm, &index, &patterns, &candidates, &SimilarityConfig::default(), 60, Method::Mpb2)?;
    println!("mpb2  AP {:.3}  meta {:?}", average_precision(exp.terms(), gold, None), exp.meta);

    let multi: Vec<String> = exp
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.term.contains(' '))
        .map(|(i, e)| format!("#{} {} ({:.3})", i + 1, e.term, e.score))
        .collect();
    println!("two-word terms ranked: {}", multi.join(", "));
    Ok(())
}
