//! Mine indicative patterns for three seeds in a synthetic world.
//!
//! `cargo run --release --example mine_patterns`

use termset::mining::{collect_candidates, mine, MiningConfig};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::SeedSet;

fn main() -> termset::Result<()> {
    let world = SyntheticWorld::generate(&SyntheticConfig::default());
    let (index, lm) = (world.index(), world.mock());
    let seeds = SeedSet::new(world.golds[0].primary_forms().take(3))?;
    println!("seeds: {}", seeds.strings().join(", "));

    let cfg = MiningConfig::with_budget(2000, seeds.len(), 10);
    let collected = collect_candidates(&index, &seeds, cfg.per_seed_sentences)?;
    println!("{} candidate patterns, per seed {:?}", collected.candidates.len(), collected.per_seed);

    let set = mine(&lm, &index, &seeds, &cfg)?;
    println!("{:>8}  {:>6}  pattern", "max rank", "weight");
    for (p, w) in set.iter() {
        println!("{:>8}  {:>6.3}  {}", p.max_rank, w, p.pattern.text());
    }

    let mut out = Vec::new();
    set.write_jsonl(&mut out).map_err(|e| termset::Error::io("patterns", e))?;
    println!("{} bytes of JSON lines", out.len());
    Ok(())
}
