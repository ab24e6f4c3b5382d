//! Backend conformance checks.
//!
//! The same checks run against the in-process mock, the mock served over
//! HTTP, and any external server that claims to implement the protocol.

use std::fmt;

use super::{completion_order, full_distribution, BackendInfo, MlmBackend, MlmError, RankError};
use crate::pattern::{MaskedPattern, MASK};

/// Tolerance for comparing log-probabilities across repeated or differently
/// shaped requests.
pub const LOGPROB_TOLERANCE: f64 = 1e-6;
/// Number of (pattern, term) rank probes.
pub const RANK_PROBES: usize = 20;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &'static str, result: Result<(), String>) {
        let (passed, detail) = match result {
            Ok(()) => (true, String::new()),
            Err(d) => (false, d),
        };
        self.checks.push(Check { name, passed, detail });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "[{mark}] {}", c.name)?;
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn err_str(e: MlmError) -> String {
    e.to_string()
}

/// Run every check. `probes` must be non-empty valid patterns that fit the
/// backend's context.
pub fn run<B: MlmBackend + ?Sized>(backend: &B, probes: &[MaskedPattern]) -> Report {
    let mut report = Report::default();
    let info = match backend.info() {
        Ok(i) => i,
        Err(e) => {
            report.record("info", Err(e.to_string()));
            return report;
        }
    };
    report.record("info", check_info(&info));
    if probes.is_empty() {
        report.record("probes", Err("no probe patterns supplied".into()));
        return report;
    }
    report.record("response shape", check_shapes(backend, &info, probes));
    report.record("full distribution normalized", check_normalized(backend, probes));
    report.record("rank/logprob consistency", check_ranks(backend, probes));
    report.record("top-q prefix", check_prefix(backend, probes));
    report.record("multi-word terms are OOV", check_multiword_oov(backend, &probes[0]));
    report.record("determinism", check_determinism(backend, probes));
    report.record("context limit error", check_context_limit(backend, &info));
    report.record("invalid top_q error", check_zero_top_q(backend, &probes[0]));
    report
}

fn check_info(info: &BackendInfo) -> Result<(), String> {
    if info.vocab_size == 0 || info.max_context == 0 || info.model.is_empty() {
        return Err(format!("degenerate info: {info:?}"));
    }
    Ok(())
}

fn check_shapes<B: MlmBackend + ?Sized>(backend: &B, info: &BackendInfo, probes: &[MaskedPattern]) -> Result<(), String> {
    for p in probes {
        let (res, _) = backend.complete(p, 5, &[]).map_err(err_str)?;
        if res.vocab_size != info.vocab_size {
            return Err(format!("vocab_size {} differs from info {}", res.vocab_size, info.vocab_size));
        }
        if res.entries.len() != 5.min(info.vocab_size) {
            return Err(format!("asked for 5 completions, got {}", res.entries.len()));
        }
        for w in res.entries.windows(2) {
            if completion_order(&w[0].term, w[0].logprob, &w[1].term, w[1].logprob).is_gt() {
                return Err(format!("entries out of order at {:?} / {:?}", w[0], w[1]));
            }
        }
        if res.entries.iter().any(|c| c.logprob > 0.0 || !c.logprob.is_finite()) {
            return Err("log-probabilities must be finite and <= 0".into());
        }
    }
    Ok(())
}

fn check_normalized<B: MlmBackend + ?Sized>(backend: &B, probes: &[MaskedPattern]) -> Result<(), String> {
    let full = match full_distribution(backend, &probes[0]) {
        Ok(f) => f,
        // A capped backend cannot be checked for normalization.
        Err(MlmError::Capability(_)) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let sum: f64 = full.entries.iter().map(|c| c.logprob.exp()).sum();
    if (sum - 1.0).abs() > LOGPROB_TOLERANCE {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(())
}

fn check_ranks<B: MlmBackend + ?Sized>(backend: &B, probes: &[MaskedPattern]) -> Result<(), String> {
    let mut done = 0;
    let mut round = 0;
    while done < RANK_PROBES {
        let p = &probes[round % probes.len()];
        let full = match full_distribution(backend, p) {
            Ok(f) => f,
            Err(MlmError::Capability(_)) => return Ok(()),
            Err(e) => return Err(e.to_string()),
        };
        let n = full.entries.len();
        // Spread probe positions over the list, deterministically.
        let pos = (round * 7919 + round / probes.len()) % n;
        let expect = &full.entries[pos];
        let (_, lookup) = backend.complete(p, 1, std::slice::from_ref(&expect.term)).map_err(err_str)?;
        let rank = lookup.rank_of(&expect.term).map_err(|e| e.to_string())?;
        if rank != pos + 1 {
            return Err(format!("{:?} ranked {rank}, full sort puts it at {}", expect.term, pos + 1));
        }
        let lp = lookup.get(&expect.term).flatten().map(|e| e.logprob).unwrap_or(f64::NAN);
        if (lp - expect.logprob).abs() > LOGPROB_TOLERANCE {
            return Err(format!("{:?} logprob {lp} vs {}", expect.term, expect.logprob));
        }
        done += 1;
        round += 1;
    }
    Ok(())
}

fn check_prefix<B: MlmBackend + ?Sized>(backend: &B, probes: &[MaskedPattern]) -> Result<(), String> {
    for p in probes {
        let (small, _) = backend.complete(p, 3, &[]).map_err(err_str)?;
        let (large, _) = backend.complete(p, 8, &[]).map_err(err_str)?;
        let same = small.entries.iter().zip(&large.entries).all(|(a, b)| {
            a.term == b.term && (a.logprob - b.logprob).abs() <= LOGPROB_TOLERANCE
        });
        if !same || small.entries.len() > large.entries.len() {
            return Err(format!("top-3 is not a prefix of top-8 for {p}"));
        }
    }
    Ok(())
}

fn check_multiword_oov<B: MlmBackend + ?Sized>(backend: &B, probe: &MaskedPattern) -> Result<(), String> {
    let term = "new york city".to_owned();
    if backend.contains(&term).map_err(err_str)? {
        return Err("vocab/contains reports a multi-word term as in vocabulary".into());
    }
    let (_, lookup) = backend.complete(probe, 1, std::slice::from_ref(&term)).map_err(err_str)?;
    match lookup.rank_of(&term) {
        Err(RankError::OutOfVocabulary(_)) => Ok(()),
        other => Err(format!("multi-word lookup returned {other:?}")),
    }
}

fn check_determinism<B: MlmBackend + ?Sized>(backend: &B, probes: &[MaskedPattern]) -> Result<(), String> {
    for p in probes {
        let (a, la) = backend.complete(p, 10, &[]).map_err(err_str)?;
        let terms: Vec<String> = a.terms().map(str::to_owned).collect();
        let (_, la2) = backend.complete(p, 10, &terms).map_err(err_str)?;
        let (b, lb) = backend.complete(p, 10, &[]).map_err(err_str)?;
        let (_, lb2) = backend.complete(p, 10, &terms).map_err(err_str)?;
        let entries_match = a.entries.len() == b.entries.len()
            && a.entries.iter().zip(&b.entries).all(|(x, y)| {
                x.term == y.term && (x.logprob - y.logprob).abs() <= LOGPROB_TOLERANCE
            });
        let lookups_match = la.len() == lb.len()
            && la2.iter().zip(lb2.iter()).all(|((k1, v1), (k2, v2))| {
                k1 == k2
                    && match (v1, v2) {
                        (Some(a), Some(b)) => a.rank == b.rank && (a.logprob - b.logprob).abs() <= LOGPROB_TOLERANCE,
                        (None, None) => true,
                        _ => false,
                    }
            });
        if !entries_match || !lookups_match {
            return Err(format!("repeated query for {p} gave a different answer"));
        }
    }
    Ok(())
}

fn check_context_limit<B: MlmBackend + ?Sized>(backend: &B, info: &BackendInfo) -> Result<(), String> {
    let len = info.max_context + 1;
    let mut tokens = vec!["word".to_owned(); len];
    tokens[0] = MASK.to_owned();
    let pattern = MaskedPattern::new(tokens, 0).map_err(|e| e.to_string())?;
    match backend.complete(&pattern, 1, &[]) {
        Err(MlmError::ContextTooLong { limit, .. }) if limit == info.max_context => Ok(()),
        other => Err(format!("expected context_too_long with limit {}, got {other:?}", info.max_context)),
    }
}

fn check_zero_top_q<B: MlmBackend + ?Sized>(backend: &B, probe: &MaskedPattern) -> Result<(), String> {
    match backend.complete(probe, 0, &[]) {
        Err(MlmError::InvalidRequest { .. }) => Ok(()),
        other => Err(format!("top_q = 0 should be rejected, got {other:?}")),
    }
}
