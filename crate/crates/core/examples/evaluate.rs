//! The evaluation drivers: MAP over random seed sets, the sentence/pattern
//! grid, the q sweep and the subset experiment.
//!
//! `cargo run --release --example evaluate`

use termset::eval::{evaluate, grid_experiment, q_sweep, subset_experiment, EvalConfig, Resources};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::Method;

fn main() -> termset::Result<()> {
    let world = SyntheticWorld::generate(&SyntheticConfig::noisy());
    let (index, lm, table) = (world.index(), world.mock(), world.embedding_table());
    let res = Resources {
        backend: Some(&lm),
        index: Some(&index),
        embeddings: Some(&table),
        candidates: None,
        patterns: None,
    };
    let gold = &world.golds[0];

    let mut cfg = EvalConfig::new(Method::Mpb1);
    cfg.trials = 4;
    print!("{}", evaluate(&res, gold, &cfg)?.to_text());

    let grid = grid_experiment(&res, gold, &[20, 200, 2000], &[10, 40, 160], &cfg)?;
    print!("\n{}", grid.to_text());

    let mut sim = EvalConfig::new(Method::Mpb2);
    sim.trials = 3;
    sim.expand.candidates = Some(80);
    print!("\n{}", q_sweep(&res, gold, &[1, 5, 20, 50], &sim)?.to_text());

    let subset = world.subset.as_ref().expect("default worlds have a subset");
    print!("\n{}", subset_experiment(&res, subset, gold, &cfg)?.to_text());
    Ok(())
}
