//! The `termset` binary: exit codes, artifacts and config round trips.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::{Expansion, GoldSet};

fn termset(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termset"))
        .current_dir(dir)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn termset")
}

fn setup() -> (tempfile::TempDir, String) {
    let tmp = tempfile::tempdir().unwrap();
    SyntheticWorld::generate(&SyntheticConfig::default()).write_to(tmp.path()).unwrap();
    let gold = GoldSet::load(&tmp.path().join("gold/set2.txt")).unwrap();
    let seeds = gold.primary_forms().take(3).collect::<Vec<_>>().join(",");
    (tmp, seeds)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn expand_writes_a_ranked_expansion() {
    let (tmp, seeds) = setup();
    let out = termset(
        tmp.path(),
        &["expand", "--world", "world.json", "--corpus", "corpus.txt", "--seeds", &seeds, "--patterns", "20"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let f = std::fs::File::open(tmp.path().join("out/expansion.jsonl")).unwrap();
    let exp = Expansion::read_jsonl(BufReader::new(f)).unwrap();
    assert_eq!(exp.len(), 200);
    assert_eq!(exp.config["patterns"], "20");
    let gold = GoldSet::load(&tmp.path().join("gold/set2.txt")).unwrap();
    assert!(exp.terms().take(30).all(|t| gold.group_of(t).is_some()));
}

#[test]
fn artifact_headers_replay_as_configs() {
    let (tmp, seeds) = setup();
    let first = termset(
        tmp.path(),
        &["mine", "--world", "world.json", "--corpus", "corpus.txt", "--seeds", &seeds, "--out", "a"],
    );
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let replay = termset(tmp.path(), &["mine", "--config", "a/patterns.jsonl", "--out", "b"]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    let a = std::fs::read(tmp.path().join("a/patterns.jsonl")).unwrap();
    let b = std::fs::read(tmp.path().join("b/patterns.jsonl")).unwrap();
    assert_eq!(a, b);

    let eval = termset(
        tmp.path(),
        &["evaluate", "--world", "world.json", "--corpus", "corpus.txt", "--set", "gold/set1.txt", "--out", "c"],
    );
    assert_eq!(code(&eval), 0, "{}", String::from_utf8_lossy(&eval.stderr));
    let replay = termset(tmp.path(), &["evaluate", "--config", "c/report.json", "--out", "d"]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stderr));
    for name in ["report.json", "report.txt"] {
        assert_eq!(
            std::fs::read(tmp.path().join("c").join(name)).unwrap(),
            std::fs::read(tmp.path().join("d").join(name)).unwrap()
        );
    }
}

#[test]
fn plain_config_files_and_overrides() {
    let (tmp, seeds) = setup();
    std::fs::write(
        tmp.path().join("run.conf"),
        format!("# synthetic run\nworld = world.json\ncorpus = corpus.txt\nseeds = {seeds}\npatterns = 15\n"),
    )
    .unwrap();
    let out = termset(tmp.path(), &["mine", "--config", "run.conf", "--with", "patterns=5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("out/patterns.jsonl")).unwrap();
    assert!(text.starts_with("# {\"config\":"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn validation_errors_exit_2() {
    let (tmp, _) = setup();
    let missing_seeds = termset(tmp.path(), &["mine", "--world", "world.json", "--corpus", "corpus.txt"]);
    assert_eq!(code(&missing_seeds), 2);
    let unknown = termset(tmp.path(), &["mine", "--with", "colour=blue"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("colour"));
    let bad_value = termset(
        tmp.path(),
        &["evaluate", "--world", "world.json", "--corpus", "corpus.txt", "--set", "gold/set0.txt", "--trials", "x"],
    );
    assert_eq!(code(&bad_value), 2);
    let no_candidates = termset(
        tmp.path(),
        &["evaluate", "--world", "world.json", "--corpus", "corpus.txt", "--set", "gold/set0.txt", "--method", "mpb2",
          "--embeddings", "embeddings.txt"],
    );
    assert_eq!(code(&no_candidates), 2);
}

#[test]
fn unknown_seed_exits_3() {
    let (tmp, seeds) = setup();
    let with_oov = format!("{},notaword", seeds.split(',').next().unwrap());
    let out = termset(
        tmp.path(),
        &["mine", "--world", "world.json", "--corpus", "corpus.txt", "--seeds", &with_oov],
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn unreachable_endpoint_exits_4() {
    let (tmp, seeds) = setup();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let endpoint = format!("http://127.0.0.1:{port}");
    let out = termset(
        tmp.path(),
        &["mine", "--endpoint", &endpoint, "--corpus", "corpus.txt", "--seeds", &seeds],
    );
    assert_eq!(code(&out), 4);
}

#[test]
fn serve_mock_passes_conformance_over_http() {
    let (tmp, _) = setup();
    let mut server = Command::new(env!("CARGO_BIN_EXE_termset"))
        .current_dir(tmp.path())
        .args(["serve-mock", "--world", "world.json", "--addr", "127.0.0.1:0"])
        .env("RUST_LOG", "error")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut url = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut url).unwrap();
    let out = termset(tmp.path(), &["conformance", "--endpoint", url.trim(), "--corpus", "corpus.txt"]);
    server.kill().unwrap();
    let _ = server.wait();
    let report = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{report}");
    assert!(report.lines().count() > 3);

    let local = termset(tmp.path(), &["conformance", "--world", "world.json"]);
    assert_eq!(code(&local), 0, "{}", String::from_utf8_lossy(&local.stdout));
}

#[test]
fn s2v_and_index_commands() {
    let (tmp, seeds) = setup();
    let idx = termset(tmp.path(), &["index", "--corpus", "corpus.txt", "--out", "idx"]);
    assert_eq!(code(&idx), 0, "{}", String::from_utf8_lossy(&idx.stderr));
    let text = std::fs::read_to_string(tmp.path().join("idx/index.tsi")).unwrap();
    assert!(text.contains("corpus=corpus.txt"));

    let mine = termset(
        tmp.path(),
        &["mine", "--world", "world.json", "--index", "idx/index.tsi", "--seeds", &seeds, "--out", "m"],
    );
    assert_eq!(code(&mine), 0, "{}", String::from_utf8_lossy(&mine.stderr));

    let s2v = termset(
        tmp.path(),
        &["expand", "--method", "s2v", "--embeddings", "embeddings.txt", "--seeds", &seeds, "--top-n", "25",
          "--out", "s"],
    );
    assert_eq!(code(&s2v), 0, "{}", String::from_utf8_lossy(&s2v.stderr));
    let f = std::fs::File::open(tmp.path().join("s/expansion.jsonl")).unwrap();
    assert_eq!(Expansion::read_jsonl(BufReader::new(f)).unwrap().len(), 25);
}
