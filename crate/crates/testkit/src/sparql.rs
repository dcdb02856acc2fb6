use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use explain_core::model::TripleSet;
use explain_core::rdf::{skolemize, to_ntriples};
use oxigraph::io::{RdfFormat, RdfParser};
use oxigraph::model::NamedNode;
use oxigraph::sparql::results::QueryResultsFormat;
use oxigraph::store::Store;
use tiny_http::{Header, Response, Server};

/// The store folds derived XSD integer types into `xsd:integer`, so seeded
/// datatypes are parked under this namespace and restored in every response.
const PRESERVED_XSD: &str = "urn:explain-testkit:xsd#";
const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// A SPARQL 1.1 protocol endpoint over an in-memory store, listening on a free local port.
pub struct SparqlFixtureEndpoint {
    store: Store,
    server: Arc<Server>,
    handle: Option<JoinHandle<()>>,
    url: String,
    requests: Arc<AtomicUsize>,
    forced_status: Arc<Mutex<Option<u16>>>,
}

fn query_of(request: &mut tiny_http::Request) -> Option<String> {
    let from_pairs = |s: &str| url::form_urlencoded::parse(s.as_bytes()).find(|(k, _)| k == "query").map(|(_, v)| v.into_owned());
    if let Some(q) = request.url().split_once('?').and_then(|(_, qs)| from_pairs(qs)) {
        return Some(q);
    }
    let mut body = String::new();
    request.as_reader().read_to_string(&mut body).ok()?;
    let form = request
        .headers()
        .iter()
        .any(|h| h.field.equiv("Content-Type") && h.value.as_str().starts_with("application/x-www-form-urlencoded"));
    if form {
        from_pairs(&body)
    } else {
        Some(body)
    }
}

fn restore_datatypes(body: Vec<u8>) -> Vec<u8> {
    match String::from_utf8(body) {
        Ok(text) => text.replace(PRESERVED_XSD, XSD_NS).into_bytes(),
        Err(e) => e.into_bytes(),
    }
}

impl SparqlFixtureEndpoint {
    pub fn start() -> Self {
        let store = Store::new().expect("in-memory store");
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind local port"));
        let addr = server.server_addr().to_ip().expect("tcp listener");
        let url = format!("http://{addr}/sparql");
        let requests = Arc::new(AtomicUsize::new(0));
        let forced_status = Arc::new(Mutex::new(None));
        let handle = {
            let (server, store, requests, forced) = (server.clone(), store.clone(), requests.clone(), forced_status.clone());
            std::thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    requests.fetch_add(1, Ordering::SeqCst);
                    if let Some(status) = *forced.lock().unwrap() {
                        let _ = request.respond(Response::from_string("forced").with_status_code(status));
                        continue;
                    }
                    let Some(query) = query_of(&mut request) else {
                        let _ = request.respond(Response::from_string("missing query").with_status_code(400));
                        continue;
                    };
                    let result = store
                        .query(query.as_str())
                        .map_err(|e| e.to_string())
                        .and_then(|r| r.write(Vec::new(), QueryResultsFormat::Json).map_err(|e| e.to_string()));
                    let _ = match result {
                        Ok(body) => request.respond(Response::from_data(restore_datatypes(body)).with_header(
                            Header::from_bytes("Content-Type", "application/sparql-results+json").unwrap(),
                        )),
                        Err(e) => request.respond(Response::from_string(e).with_status_code(400)),
                    };
                }
            })
        };
        Self { store, server, handle: Some(handle), url, requests, forced_status }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    /// Answers every request with `status` until cleared with `None`.
    pub fn force_status(&self, status: Option<u16>) {
        *self.forced_status.lock().unwrap() = status;
    }

    /// Inserts the set into its named graph. Blank nodes are stored as skolem IRIs.
    pub fn load(&self, set: &TripleSet) {
        let text = to_ntriples(&skolemize(set.triples())).replace(&format!("^^<{XSD_NS}"), &format!("^^<{PRESERVED_XSD}"));
        let graph = NamedNode::new(set.graph().as_str()).expect("graph IRI");
        self.store
            .load_from_reader(RdfParser::from_format(RdfFormat::NTriples).with_default_graph(graph), text.as_bytes())
            .expect("seed triples load");
    }
}

impl Drop for SparqlFixtureEndpoint {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}
