//! The fill-mask wire protocol, end to end over a real socket.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use termset::mining::{mine, MiningConfig};
use termset::mlm::server::{serve, ServerConfig, ServerHandle};
use termset::mlm::{conformance, BackendInfo, ClientConfig, HttpBackend, MlmBackend, MlmError, MockLm, RankLookup};
use termset::synthetic::{SyntheticConfig, SyntheticWorld};
use termset::{CompletionResult, MaskedPattern, Occurrence, SeedSet};

fn world() -> SyntheticWorld {
    SyntheticWorld::generate(&SyntheticConfig { multiword_members: 4, ..Default::default() })
}

fn start<B: MlmBackend + 'static>(backend: B, max_in_flight: usize) -> ServerHandle {
    serve(backend, "127.0.0.1:0", ServerConfig { workers: 4, max_in_flight }).expect("bind")
}

fn quick_client() -> ClientConfig {
    ClientConfig { backoff: Duration::from_millis(1), ..Default::default() }
}

fn probes(w: &SyntheticWorld) -> Vec<MaskedPattern> {
    let index = w.index();
    (0..20)
        .map(|i| {
            let s = &index.sentences()[i * 97];
            index.mask_occurrence(&Occurrence { sentence: s.id, start: 1, end: 2 }).unwrap()
        })
        .collect()
}

#[test]
fn client_matches_in_process_backend() {
    let w = world();
    let server = start(w.mock(), 64);
    let http = HttpBackend::connect(&server.url(), quick_client()).unwrap();
    let local = w.mock();
    assert_eq!(http.info().unwrap().vocab_size, local.info().unwrap().vocab_size);
    let interest: Vec<String> = w.golds[0].primary_forms().take(5).map(str::to_owned).collect();
    for p in probes(&w) {
        for q in [1, 10, 1000] {
            assert_eq!(http.complete(&p, q, &interest).unwrap(), local.complete(&p, q, &interest).unwrap());
        }
    }
    let single = w.golds[1].primary_forms().next().unwrap();
    assert!(http.contains(single).unwrap());
    assert!(!http.contains("no such term").unwrap());
    assert!(!http.contains("zzzzzz").unwrap());
}

#[test]
fn conformance_suite_passes_over_http() {
    let w = world();
    let server = start(w.mock(), 64);
    let http = HttpBackend::connect(&server.url(), quick_client()).unwrap();
    let report = conformance::run(&http, &probes(&w));
    assert!(report.passed(), "{report}");
}

#[test]
fn mining_over_http_equals_in_process() {
    let w = world();
    let server = start(w.mock(), 64);
    let http = HttpBackend::connect(&server.url(), quick_client()).unwrap();
    let index = w.index();
    let seeds = SeedSet::new(w.golds[2].primary_forms().take(3)).unwrap();
    let cfg = MiningConfig::with_budget(300, 3, 10);
    let remote = mine(&http, &index, &seeds, &cfg).unwrap();
    let local = mine(&w.mock(), &index, &seeds, &cfg).unwrap();
    assert_eq!(remote, local);
}

fn post(url: &str, body: &Value) -> (u16, Value) {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut resp = agent.post(format!("{url}/v1/fill-mask")).send_json(body).unwrap();
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap())
}

fn get(url: &str) -> (u16, Value) {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut resp = agent.get(url).call().unwrap();
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap())
}

#[test]
fn response_fields_follow_the_protocol() {
    let w = world();
    let server = start(w.mock(), 64);
    let url = server.url();
    let member = w.golds[0].primary_forms().next().unwrap().to_owned();
    let multi = w.golds[0].groups().iter().flatten().find(|t| t.contains(' ')).expect("multi-word member").clone();
    let (status, body) = post(
        &url,
        &json!({
            "tokens": ["the", "[MASK]", "is", "here"],
            "mask_index": 1,
            "top_q": 3,
            "terms_of_interest": [member, multi],
        }),
    );
    assert_eq!(status, 200);
    assert!(body["vocab_size"].as_u64().unwrap() > 0);
    let top = body["top"].as_array().unwrap();
    assert_eq!(top.len(), 3);
    assert!(top[0]["term"].is_string() && top[0]["logprob"].is_f64());
    assert!(body["lookup"][&member]["rank"].as_u64().unwrap() >= 1);
    assert!(body["lookup"][&member]["logprob"].is_f64());
    assert!(body["lookup"][&multi].is_null());

    let (status, body) = get(&format!("{url}/v1/vocab/contains?term={}", multi.replace(' ', "%20")));
    assert_eq!(status, 200);
    assert_eq!(body, json!({ "in_vocab": false }));
    let (status, body) = get(&format!("{url}/v1/info"));
    assert_eq!(status, 200);
    assert!(body["model"].is_string() && body["vocab_size"].is_u64() && body["max_context"].is_u64());
}

#[test]
fn errors_carry_codes() {
    let w = world();
    let server = start(w.mock(), 64);
    let url = server.url();

    let long: Vec<String> = std::iter::once("[MASK]".to_owned()).chain((0..2000).map(|i| format!("w{i}"))).collect();
    let (status, body) = post(&url, &json!({ "tokens": long, "mask_index": 0, "top_q": 5, "terms_of_interest": [] }));
    assert_eq!(status, 400);
    assert_eq!(body["error"], "context_too_long");
    assert!(body["detail"].is_string());
    assert!(body["limit"].is_u64());

    let (status, body) = post(&url, &json!({ "tokens": ["a", "b"], "mask_index": 0, "top_q": 5 }));
    assert_eq!(status, 400);
    assert_eq!(body["error"], "bad_request");

    let (status, body) = post(&url, &json!({ "tokens": "not a list" }));
    assert_eq!(status, 400);
    assert_eq!(body["error"], "bad_request");

    let (status, body) = get(&format!("{url}/v1/vocab/contains"));
    assert_eq!(status, 400);
    assert_eq!(body["error"], "bad_request");

    let (status, body) = get(&format!("{url}/v1/nothing"));
    assert_eq!(status, 404);
    assert_eq!(body["error"], "not_found");

    // The client maps the context error back to a typed error.
    let http = HttpBackend::connect(&url, quick_client()).unwrap();
    let tokens: Vec<String> = long.clone();
    let p = MaskedPattern::new(tokens, 0).unwrap();
    assert!(matches!(http.complete(&p, 5, &[]), Err(MlmError::ContextTooLong { len: 2001, .. })));
}

/// Answers the first `fail_first` fill-mask calls with an overload error.
struct Flaky {
    inner: MockLm,
    calls: Arc<AtomicUsize>,
    fail_first: usize,
}

impl MlmBackend for Flaky {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn info(&self) -> Result<BackendInfo, MlmError> {
        self.inner.info()
    }

    fn complete(
        &self,
        pattern: &MaskedPattern,
        top_q: usize,
        terms_of_interest: &[String],
    ) -> Result<(CompletionResult, RankLookup), MlmError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail_first {
            return Err(MlmError::Overloaded);
        }
        self.inner.complete(pattern, top_q, terms_of_interest)
    }

    fn contains(&self, term: &str) -> Result<bool, MlmError> {
        self.inner.contains(term)
    }
}

#[test]
fn overload_is_retried_with_backoff() {
    let w = world();
    let calls = Arc::new(AtomicUsize::new(0));
    let server = start(Flaky { inner: w.mock(), calls: Arc::clone(&calls), fail_first: 3 }, 64);
    let http = HttpBackend::connect(&server.url(), quick_client()).unwrap();
    let p = &probes(&w)[0];
    let got = http.complete(p, 5, &[]).unwrap();
    assert_eq!(got, w.mock().complete(p, 5, &[]).unwrap());
    assert_eq!(calls.load(Ordering::SeqCst), 4);
}

#[test]
fn retries_give_up_eventually() {
    let w = world();
    let server = start(w.mock(), 0);
    let cfg = ClientConfig { max_retries: 2, ..quick_client() };
    let http = HttpBackend::connect(&server.url(), cfg).unwrap();
    let err = http.complete(&probes(&w)[0], 5, &[]).unwrap_err();
    assert_eq!(err, MlmError::Overloaded);
    assert!(err.is_retryable());
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    // Bind and immediately drop to get a port nobody listens on.
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = ClientConfig { max_retries: 1, ..quick_client() };
    let err = HttpBackend::connect(&format!("http://127.0.0.1:{port}"), cfg).err().expect("no server");
    assert!(matches!(err, MlmError::Transport { .. }));
    let exit = termset::Error::from(err).exit_code();
    assert_eq!(exit, 4);
}
