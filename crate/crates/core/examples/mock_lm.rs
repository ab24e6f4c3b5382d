//! Build a small mock language model, query it in process and over HTTP.
//!
//! `cargo run --example mock_lm`

use std::collections::BTreeMap;

use termset::mlm::server::{serve, ServerConfig};
use termset::mlm::{conformance, ClientConfig, HttpBackend, MlmBackend, MockLm, TemplateSpec, WorldSpec};
use termset::MaskedPattern;

fn template(text: &str, weights: &[(&str, f64)]) -> TemplateSpec {
    TemplateSpec { text: text.into(), weights: weights.iter().map(|(t, w)| (t.to_string(), *w)).collect::<BTreeMap<_, _>>() }
}

fn main() -> termset::Result<()> {
    let world = WorldSpec {
        id: "fruit-and-tools".into(),
        smoothing: 0.1,
        max_context: 32,
        categories: vec![],
        extra_terms: vec!["hammer".into(), "saw".into(), "new york".into()],
        templates: vec![
            template("she ate a ripe {} for lunch", &[("pear", 5.0), ("apple", 4.0), ("plum", 2.0)]),
            template("he fixed the shelf with a {}", &[("hammer", 6.0), ("saw", 3.0)]),
        ],
    };
    let lm = MockLm::build(&world)?;
    let info = lm.info()?;
    println!("{}: vocabulary of {}", info.model, info.vocab_size);

    let tokens: Vec<String> = "she ate a ripe [MASK] for lunch".split(' ').map(str::to_owned).collect();
    let pattern = MaskedPattern::new(tokens, 4).expect("one mask at index 4");
    let interest = vec!["plum".to_owned(), "saw".to_owned(), "new york".to_owned()];
    let (top, lookup) = lm.complete(&pattern, 3, &interest)?;
    for c in &top.entries {
        println!("  {:<8} {:.4}", c.term, c.logprob);
    }
    for (term, entry) in lookup.iter() {
        match entry {
            Some(e) => println!("  {term:<8} rank {}", e.rank),
            None => println!("  {term:<8} out of vocabulary"),
        }
    }

    // The same model behind the fill-mask HTTP protocol.
    let server = serve(lm, "127.0.0.1:0", ServerConfig::default()).map_err(|e| termset::Error::io("serve", e))?;
    let remote = HttpBackend::connect(&server.url(), ClientConfig::default())?;
    let (remote_top, _) = remote.complete(&pattern, 3, &[])?;
    assert_eq!(remote_top, top);
    println!("served at {}; remote completions match", server.url());
    print!("{}", conformance::run(&remote, std::slice::from_ref(&pattern)));
    server.shutdown();
    Ok(())
}
