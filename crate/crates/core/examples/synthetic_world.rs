//! Generate a synthetic world and score every method on each category.
//!
//! `cargo run --release --example synthetic_world [noisy] [DIR]` prints one
//! MAP line per (category, method) and, when DIR is given, writes the world
//! files there so the CLI can be pointed at them.

use std::path::Path;
use std::time::Instant;

use termset::eval::{evaluate, EvalConfig, Resources};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::Method;

fn main() -> termset::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let noisy = args.iter().any(|a| a == "noisy");
    let cfg = if noisy { SyntheticConfig::noisy() } else { SyntheticConfig::default() };
    let world = SyntheticWorld::generate(&cfg);
    if let Some(dir) = args.iter().find(|a| *a != "noisy") {
        world.write_to(Path::new(dir)).map_err(|e| termset::Error::io(dir.clone(), e))?;
        println!("wrote world files to {dir}");
    }

    let index = world.index();
    let lm = world.mock();
    let table = world.embedding_table();
    let res = Resources {
        backend: Some(&lm),
        index: Some(&index),
        embeddings: Some(&table),
        candidates: None,
        patterns: None,
    };
    println!("{} sentences, {} categories", world.sentences.len(), world.golds.len());

    for gold in &world.golds {
        for method in [Method::Mpb1, Method::Bb, Method::Mpb2, Method::Mpb2o, Method::S2v] {
            let mut ec = EvalConfig::new(method);
            ec.trials = 5;
            if method == Method::Mpb1 {
                ec.expand.patterns = 20;
            }
            // The candidate list size has no default; 100 is ample for 30-member categories.
            ec.expand.candidates = Some(100);
            let start = Instant::now();
            let report = evaluate(&res, gold, &ec)?;
            println!(
                "{:<6} {:<6} MAP {:.3}  ({:.2}s)",
                gold.name(),
                method.as_str(),
                report.map,
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
