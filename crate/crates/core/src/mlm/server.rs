//! Serve any [`MlmBackend`] over the fill-mask HTTP protocol.
//!
//! Used to put the mock backend behind a real socket, so the HTTP client and
//! the conformance suite can be exercised end to end.

use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use serde::Serialize;
use tiny_http::{Header, Method, Request, Response, Server};

use super::wire::{self, ErrorBody, FillMaskRequest, FillMaskResponse, VocabContains};
use super::{MlmBackend, MlmError};
use crate::pattern::MaskedPattern;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub workers: usize,
    /// Fill-mask requests handled at once before answering 503.
    pub max_in_flight: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { workers: 4, max_in_flight: 64 }
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Block until the workers exit (they run until shutdown).
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop();
    }
}

pub fn serve<B>(backend: B, addr: &str, config: ServerConfig) -> io::Result<ServerHandle>
where
    B: MlmBackend + 'static,
{
    let server = Arc::new(Server::http(addr).map_err(io::Error::other)?);
    let local = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| io::Error::other("server is not bound to an IP address"))?;
    let backend: Arc<dyn MlmBackend> = Arc::new(backend);
    let in_flight = Arc::new(AtomicUsize::new(0));
    let workers = (0..config.workers.max(1))
        .map(|_| {
            let server = Arc::clone(&server);
            let backend = Arc::clone(&backend);
            let in_flight = Arc::clone(&in_flight);
            let limit = config.max_in_flight;
            thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    handle(req, backend.as_ref(), &in_flight, limit);
                }
            })
        })
        .collect();
    log::info!("fill-mask server listening on {local}");
    Ok(ServerHandle { addr: local, server, workers })
}

fn json<T: Serialize>(status: u16, body: &T) -> Response<io::Cursor<Vec<u8>>> {
    let bytes = serde_json::to_vec(body).expect("serializable body");
    Response::from_data(bytes)
        .with_status_code(status)
        .with_header(Header::from_bytes("Content-Type", "application/json").expect("static header"))
}

fn error(status: u16, code: &str, detail: impl Into<String>) -> Response<io::Cursor<Vec<u8>>> {
    json(status, &ErrorBody::new(code, detail))
}

fn handle(mut req: Request, backend: &dyn MlmBackend, in_flight: &AtomicUsize, limit: usize) {
    let url = req.url().to_owned();
    let (path, query) = url.split_once('?').unwrap_or((url.as_str(), ""));
    let response = match (req.method(), path) {
        (Method::Post, wire::FILL_MASK) => {
            if in_flight.fetch_add(1, Ordering::SeqCst) >= limit {
                in_flight.fetch_sub(1, Ordering::SeqCst);
                let (status, body) = ErrorBody::from_error(&MlmError::Overloaded);
                json(status, &body)
            } else {
                let mut body = String::new();
                let resp = match req.as_reader().read_to_string(&mut body) {
                    Ok(_) => fill_mask(&body, backend),
                    Err(e) => error(400, wire::CODE_BAD_REQUEST, e.to_string()),
                };
                in_flight.fetch_sub(1, Ordering::SeqCst);
                resp
            }
        }
        (Method::Get, wire::VOCAB_CONTAINS) => {
            let term = url::form_urlencoded::parse(query.as_bytes())
                .find(|(k, _)| k == "term")
                .map(|(_, v)| v.into_owned());
            match term {
                None => error(400, wire::CODE_BAD_REQUEST, "missing term parameter"),
                Some(t) => match backend.contains(&t) {
                    Ok(in_vocab) => json(200, &VocabContains { in_vocab }),
                    Err(e) => {
                        let (status, body) = ErrorBody::from_error(&e);
                        json(status, &body)
                    }
                },
            }
        }
        (Method::Get, wire::INFO) => match backend.info() {
            Ok(info) => json(200, &info),
            Err(e) => {
                let (status, body) = ErrorBody::from_error(&e);
                json(status, &body)
            }
        },
        _ => error(404, wire::CODE_NOT_FOUND, format!("no route for {path}")),
    };
    if let Err(e) = req.respond(response) {
        log::warn!("failed to send response: {e}");
    }
}

fn fill_mask(body: &str, backend: &dyn MlmBackend) -> Response<io::Cursor<Vec<u8>>> {
    let req: FillMaskRequest = match serde_json::from_str(body) {
        Ok(r) => r,
        Err(e) => return error(400, wire::CODE_BAD_REQUEST, e.to_string()),
    };
    let pattern = match MaskedPattern::new(req.tokens, req.mask_index) {
        Ok(p) => p,
        Err(e) => return error(400, wire::CODE_BAD_REQUEST, e.to_string()),
    };
    match backend.complete(&pattern, req.top_q, &req.terms_of_interest) {
        Ok((result, lookup)) => json(200, &FillMaskResponse::from_parts(result, lookup)),
        Err(e) => {
            let (status, body) = ErrorBody::from_error(&e);
            json(status, &body)
        }
    }
}
