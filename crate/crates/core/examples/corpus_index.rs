//! Index a handful of sentences, look terms up and mask an occurrence.
//!
//! `cargo run --example corpus_index`

use std::collections::BTreeMap;

use termset::{CorpusIndex, TokenizerConfig};

fn main() -> termset::Result<()> {
    let lines = [
        "I flew to New York last spring.",
        "",
        "The museum in new york opens at nine.",
        "She ate an orange and a pear.",
        "Orange juice, apple juice or water?",
    ];
    let index = CorpusIndex::from_sentences(lines, TokenizerConfig::default())?;
    println!(
        "{} sentences, {} tokens, {} distinct ({} blank line skipped)",
        index.sentence_count(),
        index.token_count(),
        index.vocabulary_size(),
        index.stats().skipped_blank
    );

    for term in ["new york", "orange", "juice", "banana"] {
        let occ = index.find_occurrences(term, 10)?;
        println!("{term:>9}: {} occurrence(s)", occ.len());
        for o in occ {
            println!("           {}", index.mask_occurrence(&o)?.text());
        }
    }

    // The index round-trips through its text format.
    let mut buf = Vec::new();
    index.save(&mut buf, &BTreeMap::from([("source".to_owned(), "inline".to_owned())]))?;
    let back = CorpusIndex::load(buf.as_slice())?;
    assert_eq!(back.find_occurrences("new york", 10)?, index.find_occurrences("new york", 10)?);
    println!("saved index: {} bytes", buf.len());
    Ok(())
}
