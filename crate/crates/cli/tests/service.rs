use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use explain_cli::config::Config;
use explain_cli::service::{router, AppState};
use explain_cli::store::Store;
use explain_core::experiment::read_entry;
use explain_core::model::AnnotationKind;
use explain_core::sparql::QueryRegistry;
use explain_core::template::TemplateEngine;
use explain_core::InputQueryKey;
use explain_testkit::{fixtures_dir, sparql::SparqlFixtureEndpoint};
use serde_json::{json, Value};
use tower::ServiceExt;

struct Harness {
    app: Router,
    _dir: tempfile::TempDir,
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let config = Config { mock: true, store_path: dir.path().join("store.ndjson"), ..Config::default() };
    let state = AppState::from_config(&config).unwrap();
    Harness { app: router(state, &config), _dir: dir }
}

impl Harness {
    async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
    }

    async fn post(&self, path: &str, body: Value) -> (StatusCode, Value) {
        self.post_with(path, body, None).await
    }

    async fn post_with(&self, path: &str, body: Value, rater: Option<&str>) -> (StatusCode, Value) {
        let mut req = Request::post(path).header("content-type", "application/json");
        if let Some(r) = rater {
            req = req.header("x-rater-id", r);
        }
        let (status, bytes) = self.send(req.body(Body::from(body.to_string())).unwrap()).await;
        (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }

    async fn get(&self, path: &str) -> (StatusCode, Vec<u8>) {
        self.send(Request::get(path).body(Body::empty()).unwrap()).await
    }
}

fn textrazor_text() -> String {
    std::fs::read_to_string(fixtures_dir().join("output/textrazor.nt")).unwrap()
}

fn golden() -> String {
    std::fs::read_to_string(fixtures_dir().join("output/textrazor.template.txt")).unwrap().trim_end().to_string()
}

#[tokio::test]
async fn inline_and_endpoint_paths_agree() {
    let h = harness();
    let entry = read_entry(AnnotationKind::SpotInstance, &textrazor_text(), "textrazor").unwrap();
    let endpoint = SparqlFixtureEndpoint::start();
    endpoint.load(&entry.set);

    let (status, inline) = h
        .post(
            "/explanations/output",
            json!({ "triples": textrazor_text(), "graph": entry.set.graph().as_str(), "method": "template" }),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{inline}");
    let (status, remote) = h
        .post(
            "/explanations/output",
            json!({
                "endpoint": endpoint.url(),
                "graph": entry.set.graph().as_str(),
                "component": entry.set.component().as_str(),
                "method": "template"
            }),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{remote}");
    assert_eq!(inline["text"], remote["text"]);
    assert_eq!(inline["text"], golden());
    assert_eq!(inline["id"], remote["id"]);
}

#[tokio::test]
async fn output_request_validation() {
    let h = harness();
    let (status, _) = h.post("/explanations/output", json!({ "method": "template" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = h
        .post("/explanations/output", json!({ "triples": "x", "endpoint": "http://localhost:1/sparql", "method": "template" }))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = h.post("/explanations/output", json!({ "triples": "not rdf at all", "method": "template" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, bytes) = h
        .send(Request::post("/explanations/output").header("content-type", "application/json").body(Body::from("{")).unwrap())
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{}", String::from_utf8_lossy(&bytes));
}

#[tokio::test]
async fn unreachable_endpoint_is_bad_gateway() {
    let h = harness();
    let (status, body) = h
        .post(
            "/explanations/output",
            json!({
                "endpoint": "http://127.0.0.1:9/sparql",
                "graph": "urn:graph:g",
                "component": "urn:qanary:TextRazor",
                "method": "template"
            }),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_GATEWAY, "{body}");
}

#[tokio::test]
async fn input_template_matches_library() {
    let h = harness();
    for entry in QueryRegistry::standard().entries() {
        let (status, body) = h.post("/explanations/input", json!({ "query": entry.text, "method": "template" })).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        assert_eq!(body["text"], TemplateEngine::standard().input_text(entry.key).unwrap());
        assert_eq!(body["kind"], entry.key.code());
    }
    let (status, _) = h.post("/explanations/input", json!({ "query": "SELECT * WHERE { ?s ?p ?o }", "method": "template" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn input_llm_with_mock() {
    let h = harness();
    let query = &QueryRegistry::standard().entry(InputQueryKey::I3).unwrap().text;
    let (status, body) = h
        .post("/explanations/input", json!({ "query": query, "method": "llm", "shots": 2, "component": "urn:qanary:Falcon" }))
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["method"], "llm");
    assert_eq!(body["provenance"]["shots"], 2);
    let prompt = body["provenance"]["promptText"].as_str().unwrap();
    assert!(prompt.ends_with("Don't use more than 3 sentences."));
    assert!(prompt.contains("urn:qanary:Falcon"));
    assert!(!body["text"].as_str().unwrap().is_empty());

    let (status, _) =
        h.post("/explanations/input", json!({ "query": query, "method": "llm", "shots": 1, "exampleKinds": ["O1"] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn output_llm_and_evaluation() {
    let h = harness();
    let (status, body) =
        h.post("/explanations/output", json!({ "triples": textrazor_text(), "method": "llm", "shots": 1 })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert!(body["provenance"]["promptText"].as_str().unwrap().ends_with("Don't introduce your answer and only return the result."));
    let (status, eval) = h.post("/evaluations", json!({ "explanationId": body["id"] })).await;
    assert_eq!(status, StatusCode::OK, "{eval}");
    assert_eq!(eval["explanationId"], body["id"]);

    let (_, template) = h.post("/explanations/output", json!({ "triples": textrazor_text(), "method": "template" })).await;
    let (status, eval) = h.post("/evaluations", json!({ "explanationId": template["id"] })).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(eval["score"]["prefixRating"], 3);
    assert_eq!(eval["score"]["annotationRatings"], json!([3]));

    let (status, _) = h.post("/evaluations", json!({ "explanationId": "nope" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let query = &QueryRegistry::standard().entry(InputQueryKey::I1).unwrap().text;
    let (_, input) = h.post("/explanations/input", json!({ "query": query, "method": "template" })).await;
    let (status, _) = h.post("/evaluations", json!({ "explanationId": input["id"] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn ratings_validate_overwrite_and_export() {
    let h = harness();
    let (_, e) = h.post("/explanations/output", json!({ "triples": textrazor_text(), "method": "template" })).await;
    let id = e["id"].as_str().unwrap();

    let (status, _) = h.post_with("/ratings", json!({ "explanationId": id, "metric": "quality", "value": 6 }), Some("r1")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = h.post_with("/ratings", json!({ "explanationId": id, "metric": "quality", "value": 0 }), Some("r1")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = h.post_with("/ratings", json!({ "explanationId": "missing", "metric": "quality", "value": 3 }), Some("r1")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h.post("/ratings", json!({ "explanationId": id, "metric": "quality", "value": 3 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = h.post_with("/ratings", json!({ "explanationId": id, "metric": "quality", "value": 2 }), Some("r1")).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = h.post_with("/ratings", json!({ "explanationId": id, "metric": "quality", "value": 5 }), Some("r1")).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) =
        h.post("/ratings", json!({ "explanationId": id, "raterId": "r2", "metric": "quality", "value": 4 })).await;
    assert_eq!(status, StatusCode::OK);

    let (_, ratings) = h.get(&format!("/ratings?explanationId={id}")).await;
    let ratings: Vec<Value> = serde_json::from_slice(&ratings).unwrap();
    assert_eq!(ratings.len(), 2);

    let (status, csv) = h.get("/ratings/export").await;
    assert_eq!(status, StatusCode::OK);
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv, "subjectKind,metric,method,shots,model,ratings,mean\noutput,quality,template,,,2,4.500\n");
    let (_, records) = h.get("/ratings/export?format=records").await;
    assert_eq!(String::from_utf8(records).unwrap().lines().count(), 3);
}

#[tokio::test]
async fn listing_filters_and_pages() {
    let h = harness();
    for entry in QueryRegistry::standard().entries() {
        h.post("/explanations/input", json!({ "query": entry.text, "method": "template" })).await;
    }
    h.post("/explanations/output", json!({ "triples": textrazor_text(), "method": "template" })).await;

    let (_, page) = h.get("/explanations?subjectKind=InputData&pageSize=4").await;
    let page: Value = serde_json::from_slice(&page).unwrap();
    assert_eq!(page["total"], 6);
    assert_eq!(page["items"].as_array().unwrap().len(), 4);
    let (_, page) = h.get("/explanations?subjectKind=InputData&pageSize=4&page=2").await;
    let page: Value = serde_json::from_slice(&page).unwrap();
    assert_eq!(page["items"].as_array().unwrap().len(), 2);
    let (_, page) = h.get("/explanations?kind=O2").await;
    let page: Value = serde_json::from_slice(&page).unwrap();
    assert_eq!(page["total"], 1);
    let id = page["items"][0]["id"].as_str().unwrap().to_string();
    let (status, _) = h.get(&format!("/explanations/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = h.get("/explanations/unknown").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn health_and_openapi() {
    let h = harness();
    let (status, _) = h.get("/health").await;
    assert_eq!(status, StatusCode::OK);
    let (status, doc) = h.get("/openapi.json").await;
    assert_eq!(status, StatusCode::OK);
    let doc: Value = serde_json::from_slice(&doc).unwrap();
    for path in ["/explanations/input", "/explanations/output", "/evaluations", "/ratings", "/ratings/export", "/experiments"] {
        assert!(doc["paths"].get(path).is_some(), "{path}");
    }
}

#[tokio::test]
async fn store_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = Config { mock: true, store_path: dir.path().join("store.ndjson"), ..Config::default() };
    let id = {
        let state = AppState::from_config(&config).unwrap();
        let app = router(state, &config);
        let req = Request::post("/explanations/output")
            .header("content-type", "application/json")
            .body(Body::from(json!({ "triples": textrazor_text(), "method": "template" }).to_string()))
            .unwrap();
        let resp = app.oneshot(req).await.unwrap();
        let body: Value = serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.unwrap()).unwrap();
        body["id"].as_str().unwrap().to_string()
    };
    let store = Store::open(&config.store_path).unwrap();
    assert!(store.snapshot().explanation(&id).is_some());
}
