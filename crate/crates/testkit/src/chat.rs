use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Response, Server};

/// One scripted answer of [`StubChatServer`].
#[derive(Clone, Debug)]
pub enum Reply {
    /// A well-formed completion with this assistant content.
    Content(String),
    /// An empty response with this status.
    Status(u16),
    /// A 200 response with this raw body.
    Body(String),
    /// Waits before sending the next reply in the script.
    Stall(Duration, Box<Reply>),
}

/// A chat-completions endpoint that plays back a script, one reply per request;
/// the last reply repeats once the script is exhausted.
pub struct StubChatServer {
    server: Arc<Server>,
    handle: Option<JoinHandle<()>>,
    url: String,
    hits: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<String>>>,
}

fn respond(request: tiny_http::Request, reply: &Reply, n: usize) {
    let json = Header::from_bytes("Content-Type", "application/json").unwrap();
    let _ = match reply {
        Reply::Content(text) => {
            let body = serde_json::json!({
                "id": format!("chatcmpl-{n}"),
                "object": "chat.completion",
                "choices": [{"index": 0, "message": {"role": "assistant", "content": text}, "finish_reason": "stop"}]
            });
            request.respond(Response::from_string(body.to_string()).with_header(json))
        }
        Reply::Status(status) => request.respond(Response::from_string("{}").with_status_code(*status).with_header(json)),
        Reply::Body(body) => request.respond(Response::from_string(body.clone()).with_header(json)),
        Reply::Stall(delay, next) => {
            std::thread::sleep(*delay);
            respond(request, next, n);
            return;
        }
    };
}

impl StubChatServer {
    pub fn start(script: Vec<Reply>) -> Self {
        assert!(!script.is_empty(), "script needs at least one reply");
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind local port"));
        let url = format!("http://{}/v1/chat/completions", server.server_addr().to_ip().expect("tcp listener"));
        let hits = Arc::new(AtomicUsize::new(0));
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let handle = {
            let (server, hits, bodies) = (server.clone(), hits.clone(), bodies.clone());
            std::thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let n = hits.fetch_add(1, Ordering::SeqCst);
                    let mut body = String::new();
                    let _ = request.as_reader().read_to_string(&mut body);
                    bodies.lock().unwrap().push(body);
                    respond(request, &script[n.min(script.len() - 1)], n);
                }
            })
        };
        Self { server, handle: Some(handle), url, hits, bodies }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Request bodies in arrival order.
    pub fn bodies(&self) -> Vec<String> {
        self.bodies.lock().unwrap().clone()
    }
}

impl Drop for StubChatServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}
