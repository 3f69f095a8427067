//! Minimal HTTP/1.1 server for exercising the client against scripted faults.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use camdiff::http::wire;
use camdiff_core::backend::{GeneratorBackend, InpaintOptions, InpaintRequest, MockGenerator};

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    pub fn json(status: u16, body: impl Into<String>) -> Self {
        Self {
            status,
            body: body.into(),
        }
    }

    pub fn error(status: u16, message: &str) -> Self {
        Self::json(status, serde_json::json!({ "error": message }).to_string())
    }
}

type Handler = dyn Fn(&Request, usize) -> Response + Send + Sync;

pub struct StubServer {
    pub url: String,
    calls: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
    addr: std::net::SocketAddr,
}

impl StubServer {
    /// Serves `handler(request, zero-based call number)` until dropped.
    pub fn start(handler: impl Fn(&Request, usize) -> Response + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let calls = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        let handler: Arc<Handler> = Arc::new(handler);
        {
            let calls = calls.clone();
            let stop = stop.clone();
            thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let handler = handler.clone();
                    let calls = calls.clone();
                    thread::spawn(move || serve(stream, &*handler, &calls));
                }
            });
        }
        Self {
            url: format!("http://{addr}"),
            calls,
            stop,
            addr,
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop so it sees the flag.
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(200));
    }
}

fn serve(stream: TcpStream, handler: &Handler, calls: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_owned();
    let path = parts.next().unwrap_or_default().to_owned();
    let mut length = 0usize;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header).unwrap_or(0) == 0 || header == "\r\n" {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let request = Request {
        method,
        path,
        body: String::from_utf8_lossy(&body).into_owned(),
    };
    let n = calls.fetch_add(1, Ordering::SeqCst);
    let response = handler(&request, n);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        response.status,
        response.body.len(),
        response.body
    );
    let _ = stream.flush();
}

/// A well-behaved model service: the mock generator behind `/v1/inpaint`, a
/// constant score behind `/v1/score`.
pub fn model_service(score: f64) -> impl Fn(&Request, usize) -> Response + Send + Sync {
    move |req, _| match (req.method.as_str(), req.path.as_str()) {
        ("GET", "/v1/health") => Response::json(
            200,
            r#"{"status":"ok","generator":"mock","discriminator":"mock"}"#,
        ),
        ("POST", "/v1/inpaint") => {
            let body: wire::InpaintRequest = serde_json::from_str(&req.body).unwrap();
            let masked = wire::decode_image(&body.image).unwrap();
            let raster = wire::decode_mask(&body.mask).unwrap();
            let out = MockGenerator::default()
                .inpaint(&InpaintRequest {
                    masked: &masked,
                    raster: &raster,
                    prompt: &body.prompt,
                    seed: body.seed,
                    options: InpaintOptions::default(),
                })
                .unwrap();
            let resp = wire::InpaintResponse {
                image: wire::encode_image(&out).unwrap(),
            };
            Response::json(200, serde_json::to_string(&resp).unwrap())
        }
        ("POST", "/v1/score") => Response::json(200, format!(r#"{{"score":{score}}}"#)),
        _ => Response::error(404, "no such endpoint"),
    }
}

/// An address nothing listens on.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}
