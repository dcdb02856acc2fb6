//! The HTTP API.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method as HttpMethod, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use explain_core::digest::derive_seed;
use explain_core::eval::{format_decimal, score_explanation};
use explain_core::experiment::{self, builtin_output_examples, input_examples, load_output_examples, ExperimentPlan, RunOptions};
use explain_core::gateway::{AuditingGateway, CompletionGateway, HttpGateway, MockGateway};
use explain_core::model::{Annotation, Explanation, InputQueryKey, Iri, Method, PrefixTable, SubjectKind, TripleSet};
use explain_core::prompt::{build_input_prompt, build_output_prompt, select_examples, ExampleKind, ExamplePair, PromptSpec, MAX_SHOTS};
use explain_core::rdf::{group_annotations, parse_ntriples, to_compact, to_ntriples, RdfError};
use explain_core::sparql::normalize_query;
use explain_core::template::{output_source_ref, TemplateEngine, TemplateError};
use explain_core::triplestore::TriplestoreClient;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::Config;
use crate::store::{Metric, RatingRecord, Store, StoreError, StoredExplanation};

pub const RATER_HEADER: &str = "x-rater-id";
const OPENAPI: &str = include_str!("../assets/openapi.json");

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message.to_string())
    }

    fn bad_gateway(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_GATEWAY, message.to_string())
    }

    fn not_found(message: impl ToString) -> Self {
        Self::new(StatusCode::NOT_FOUND, message.to_string())
    }

    fn internal(message: impl ToString) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message.to_string())
    }

    pub fn status(&self) -> StatusCode {
        self.status
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownExplanation(_) => ApiError::not_found(e),
            StoreError::Io { .. } => ApiError::internal(e),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Everything a request handler needs; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<TemplateEngine>,
    pub gateway: Arc<dyn CompletionGateway>,
    pub store: Arc<Store>,
    pub output_examples: Arc<Vec<ExamplePair>>,
    pub input_examples: Arc<Vec<ExamplePair>>,
    pub default_model: String,
}

impl AppState {
    pub fn from_config(config: &Config) -> anyhow::Result<Self> {
        Self::with_store(config, Store::open(&config.store_path)?)
    }

    pub fn with_store(config: &Config, store: Store) -> anyhow::Result<Self> {
        let engine = match &config.template_dir {
            Some(dir) => TemplateEngine::with_directory(dir)?,
            None => TemplateEngine::standard().clone(),
        };
        let gateway: Arc<dyn CompletionGateway> = if config.mock {
            let table = config.mock_table.as_deref().map(MockGateway::load_table).transpose()?.unwrap_or_default();
            wrap_audit(MockGateway::synthesizing().with_table(table), config.audit_log.as_ref())?
        } else {
            wrap_audit(HttpGateway::new(config.llm.clone()), config.audit_log.as_ref())?
        };
        let output_examples = match &config.examples_path {
            Some(dir) => load_output_examples(dir, &engine)?,
            None => builtin_output_examples(&engine),
        };
        let input_examples = input_examples(&engine)?;
        Ok(Self {
            engine: Arc::new(engine),
            gateway,
            store: Arc::new(store),
            output_examples: Arc::new(output_examples),
            input_examples: Arc::new(input_examples),
            default_model: config.llm.model_id.clone(),
        })
    }
}

fn wrap_audit<G: CompletionGateway + 'static>(gateway: G, audit: Option<&PathBuf>) -> anyhow::Result<Arc<dyn CompletionGateway>> {
    Ok(match audit {
        Some(path) => Arc::new(AuditingGateway::to_file(gateway, path)?),
        None => Arc::new(gateway),
    })
}

pub fn router(state: AppState, config: &Config) -> Router {
    let cors = if config.cors_origins.iter().any(|o| o == "*") {
        CorsLayer::new().allow_origin(AllowOrigin::any())
    } else {
        let origins: Vec<HeaderValue> = config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
        CorsLayer::new().allow_origin(origins)
    }
    .allow_methods([HttpMethod::GET, HttpMethod::POST])
    .allow_headers([header::CONTENT_TYPE, header::HeaderName::from_static(RATER_HEADER)]);

    let mut app = Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/openapi.json", get(openapi))
        .route("/explanations", get(list_explanations))
        .route("/explanations/{id}", get(get_explanation))
        .route("/explanations/input", post(explain_input))
        .route("/explanations/output", post(explain_output))
        .route("/evaluations", post(evaluate))
        .route("/ratings", post(submit_rating).get(list_ratings))
        .route("/ratings/export", get(export_ratings))
        .route("/experiments", post(run_experiment));
    if let Some(dir) = &config.ui_dir {
        app = app.nest_service("/ui", tower_http::services::ServeDir::new(dir));
    }
    app.layer(cors).with_state(state)
}

pub async fn serve(config: Config) -> anyhow::Result<()> {
    let state = AppState::from_config(&config)?;
    let app = router(state, &config);
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn blocking<T: Send + 'static>(work: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(work).await.map_err(ApiError::internal)?
}

async fn openapi() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], OPENAPI)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InputRequest {
    pub query: String,
    #[serde(default)]
    pub component: Option<String>,
    pub method: Method,
    #[serde(default)]
    pub shots: Option<u8>,
    #[serde(default)]
    pub example_kinds: Option<Vec<ExampleKind>>,
    #[serde(default)]
    pub model_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputRequest {
    /// Inline triples, N-Triples or the abbreviated form.
    #[serde(default)]
    pub triples: Option<String>,
    /// SPARQL endpoint to fetch the component's output from.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub graph: Option<String>,
    #[serde(default)]
    pub component: Option<String>,
    pub method: Method,
    #[serde(default)]
    pub shots: Option<u8>,
    #[serde(default)]
    pub example_kinds: Option<Vec<ExampleKind>>,
    #[serde(default)]
    pub model_id: Option<String>,
}

/// Shots and example kinds from a request, defaulting one from the other.
fn shot_plan(shots: Option<u8>, kinds: Option<Vec<ExampleKind>>, default: impl Fn(usize) -> Vec<ExampleKind>) -> ApiResult<Vec<ExampleKind>> {
    let kinds = match (shots, kinds) {
        (Some(n), Some(k)) if k.len() != n as usize => {
            return Err(ApiError::bad_request(format!("{n} shot(s) but {} example kind(s)", k.len())))
        }
        (_, Some(k)) => k,
        (n, None) => default(n.unwrap_or(0) as usize),
    };
    if kinds.len() > MAX_SHOTS {
        return Err(ApiError::bad_request(format!("at most {MAX_SHOTS} examples are supported")));
    }
    Ok(kinds)
}

fn pick_examples(pool: &[ExamplePair], kinds: &[ExampleKind], subject: SubjectKind, seed: u64) -> ApiResult<Vec<ExamplePair>> {
    if let Some(k) = kinds.iter().find(|k| k.subject_kind() != subject) {
        return Err(ApiError::bad_request(format!("example kind {k} does not fit this explanation")));
    }
    select_examples(pool, kinds, seed).map_err(ApiError::bad_request)
}

/// The prompt an LLM input explanation is generated from.
pub fn input_prompt(state: &AppState, req: &InputRequest) -> ApiResult<PromptSpec> {
    if req.query.trim().is_empty() {
        return Err(ApiError::bad_request("query is empty"));
    }
    let own = state.engine.queries().classify(&req.query).ok().map(|r| r.key);
    let kinds = shot_plan(req.shots, req.example_kinds.clone(), |n| {
        InputQueryKey::ALL.into_iter().filter(|k| Some(*k) != own).take(n).map(ExampleKind::from).collect()
    })?;
    let normalized = normalize_query(&req.query);
    let examples = pick_examples(&state.input_examples, &kinds, SubjectKind::InputData, derive_seed(0, &[&normalized]))?;
    let component = req.component.clone().unwrap_or_default();
    build_input_prompt(&examples, &req.query, &component).map_err(ApiError::bad_request)
}

pub fn explain_input_sync(state: &AppState, req: InputRequest) -> ApiResult<StoredExplanation> {
    if req.query.trim().is_empty() {
        return Err(ApiError::bad_request("query is empty"));
    }
    let record = state.engine.queries().classify(&req.query);
    let explanation = match req.method {
        Method::Template => {
            let record = record.as_ref().map_err(ApiError::bad_request)?;
            state.engine.explain_input(record).map_err(ApiError::bad_request)?
        }
        Method::Llm => {
            let prompt = input_prompt(state, &req)?;
            let model = req.model_id.clone().unwrap_or_else(|| state.default_model.clone());
            let completion = state.gateway.complete(&prompt, &model).map_err(ApiError::bad_gateway)?;
            Explanation::from_llm(SubjectKind::InputData, completion.text, prompt.test_ref, model, prompt.text, prompt.shots)
        }
    };
    let stored = StoredExplanation {
        explanation,
        raw_data: req.query,
        graph: record.as_ref().ok().and_then(|r| r.graph.as_ref().map(Iri::to_string)),
        component: req.component,
        kind: record.ok().map(|r| r.key.code().to_string()),
        annotations: Vec::new(),
    };
    Ok((*state.store.put_explanation(stored)?).clone())
}

fn resolve_output(req: &OutputRequest) -> ApiResult<TripleSet> {
    let iri = |field: &str, v: &str| Iri::new(v).map_err(|e| ApiError::bad_request(format!("{field}: {e}")));
    match (&req.triples, &req.endpoint) {
        (Some(_), Some(_)) => Err(ApiError::bad_request("give either inline triples or an endpoint, not both")),
        (None, None) => Err(ApiError::bad_request("give inline triples or an endpoint")),
        (Some(text), None) => {
            let triples = parse_ntriples(text).map_err(ApiError::bad_request)?;
            let component = match &req.component {
                Some(c) => iri("component", c)?,
                None => {
                    let grouping = explain_core::rdf::group_triples(&triples, None).map_err(rdf_error)?;
                    grouping.annotations[0].annotated_by.clone()
                }
            };
            let graph = iri("graph", req.graph.as_deref().unwrap_or("urn:graph:inline"))?;
            TripleSet::new(graph, component, triples).map_err(ApiError::bad_request)
        }
        (None, Some(endpoint)) => {
            let graph = iri("graph", req.graph.as_deref().ok_or_else(|| ApiError::bad_request("graph is required with an endpoint"))?)?;
            let component = iri(
                "component",
                req.component.as_deref().ok_or_else(|| ApiError::bad_request("component is required with an endpoint"))?,
            )?;
            TriplestoreClient::new(endpoint.clone()).fetch_component_output(&graph, &component).map_err(ApiError::bad_gateway)
        }
    }
}

fn rdf_error(e: RdfError) -> ApiError {
    match e {
        RdfError::MissingType => ApiError::bad_request("the data contains no annotation of a known type"),
        other => ApiError::bad_request(other),
    }
}

fn output_prompt_for(state: &AppState, req: &OutputRequest, set: &TripleSet, annotations: &[Annotation]) -> ApiResult<PromptSpec> {
    let kind = annotations[0].kind;
    let kinds = shot_plan(req.shots, req.example_kinds.clone(), |n| vec![ExampleKind::from(kind); n])?;
    let examples = pick_examples(&state.output_examples, &kinds, SubjectKind::OutputData, derive_seed(0, &[&output_source_ref(set)]))?;
    let question = annotations[0].target_question.as_ref().map_or_else(|| set.graph().to_string(), Iri::to_string);
    let data = to_compact(set.triples(), &PrefixTable::standard());
    build_output_prompt(&examples, &data, &question).map_err(ApiError::bad_request)
}

/// The prompt an LLM output explanation is generated from.
pub fn output_prompt(state: &AppState, req: &OutputRequest) -> ApiResult<PromptSpec> {
    let set = resolve_output(req)?;
    let annotations = group_annotations(&set).map_err(rdf_error)?.annotations;
    output_prompt_for(state, req, &set, &annotations)
}

pub fn explain_output_sync(state: &AppState, req: OutputRequest) -> ApiResult<StoredExplanation> {
    let set = resolve_output(&req)?;
    let annotations = group_annotations(&set).map_err(rdf_error)?.annotations;
    let explanation = match req.method {
        Method::Template => state.engine.explain_output(&set).map_err(|e| match e {
            TemplateError::Rdf(e) => rdf_error(e),
            other => ApiError::bad_request(other),
        })?,
        Method::Llm => {
            let prompt = output_prompt_for(state, &req, &set, &annotations)?;
            let model = req.model_id.clone().unwrap_or_else(|| state.default_model.clone());
            let completion = state.gateway.complete(&prompt, &model).map_err(ApiError::bad_gateway)?;
            Explanation::from_llm(SubjectKind::OutputData, completion.text, output_source_ref(&set), model, prompt.text, prompt.shots)
        }
    };
    let stored = StoredExplanation {
        explanation,
        raw_data: to_ntriples(set.triples()),
        graph: Some(set.graph().to_string()),
        component: Some(set.component().to_string()),
        kind: Some(annotations[0].kind.code().to_string()),
        annotations,
    };
    Ok((*state.store.put_explanation(stored)?).clone())
}

async fn explain_input(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<StoredExplanation>> {
    let req: InputRequest = parse_body(&body)?;
    blocking(move || explain_input_sync(&state, req)).await.map(Json)
}

async fn explain_output(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<StoredExplanation>> {
    let req: OutputRequest = parse_body(&body)?;
    blocking(move || explain_output_sync(&state, req)).await.map(Json)
}

async fn get_explanation(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<StoredExplanation>> {
    let snapshot = state.store.snapshot();
    let stored = snapshot.explanation(&id).ok_or_else(|| ApiError::not_found(format!("unknown explanation {id}")))?;
    Ok(Json((**stored).clone()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ListQuery {
    pub method: Option<Method>,
    pub subject_kind: Option<SubjectKind>,
    pub kind: Option<String>,
    pub component: Option<String>,
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Page {
    pub items: Vec<StoredExplanation>,
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
}

pub fn list_sync(state: &AppState, q: &ListQuery) -> Page {
    let page = q.page.unwrap_or(1).max(1);
    let page_size = q.page_size.unwrap_or(20).clamp(1, 200);
    let snapshot = state.store.snapshot();
    let matching: Vec<_> = snapshot
        .explanations()
        .filter(|s| q.method.is_none_or(|m| s.explanation.method() == m))
        .filter(|s| q.subject_kind.is_none_or(|k| s.explanation.subject_kind() == k))
        .filter(|s| q.kind.as_ref().is_none_or(|k| s.kind.as_ref() == Some(k)))
        .filter(|s| q.component.as_ref().is_none_or(|c| s.component.as_ref() == Some(c)))
        .collect();
    let items = matching.iter().skip((page - 1) * page_size).take(page_size).map(|s| (***s).clone()).collect();
    Page { items, total: matching.len(), page, page_size }
}

async fn list_explanations(State(state): State<AppState>, Query(q): Query<ListQuery>) -> Json<Page> {
    Json(list_sync(&state, &q))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct EvaluationRequest {
    explanation_id: String,
}

pub fn evaluate_sync(state: &AppState, explanation_id: &str) -> ApiResult<Value> {
    let snapshot = state.store.snapshot();
    let stored = snapshot
        .explanation(explanation_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown explanation {explanation_id}")))?;
    if stored.explanation.subject_kind() != SubjectKind::OutputData {
        return Err(ApiError::bad_request("only output-data explanations are scored"));
    }
    let component = Iri::new(stored.component.clone().unwrap_or_default()).map_err(ApiError::internal)?;
    let evaluation = score_explanation(stored.explanation.text(), &component, &stored.annotations).map_err(ApiError::bad_request)?;
    let mut value = serde_json::to_value(&evaluation).map_err(ApiError::internal)?;
    value["explanationId"] = json!(explanation_id);
    Ok(value)
}

async fn evaluate(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: EvaluationRequest = parse_body(&body)?;
    blocking(move || evaluate_sync(&state, &req.explanation_id)).await.map(Json)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RatingRequest {
    pub explanation_id: String,
    #[serde(default)]
    pub rater_id: Option<String>,
    pub metric: String,
    pub value: i64,
}

pub fn rate_sync(state: &AppState, req: RatingRequest, header_rater: Option<String>) -> ApiResult<RatingRecord> {
    let rater_id = req
        .rater_id
        .or(header_rater)
        .filter(|r| !r.trim().is_empty())
        .ok_or_else(|| ApiError::bad_request(format!("a rater id is required, in the body or the {RATER_HEADER} header")))?;
    let metric = Metric::ALL
        .into_iter()
        .find(|m| m.as_str().eq_ignore_ascii_case(&req.metric))
        .ok_or_else(|| ApiError::bad_request(format!("unknown metric {}", req.metric)))?;
    if !(1..=5).contains(&req.value) {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, format!("rating {} is outside 1..5", req.value)));
    }
    let record = RatingRecord {
        explanation_id: req.explanation_id,
        rater_id,
        metric,
        value: req.value as u8,
        submitted_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    };
    state.store.put_rating(record.clone())?;
    Ok(record)
}

async fn submit_rating(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> ApiResult<Json<RatingRecord>> {
    let req: RatingRequest = parse_body(&body)?;
    let rater = headers.get(RATER_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string);
    blocking(move || rate_sync(&state, req, rater)).await.map(Json)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RatingFilter {
    explanation_id: Option<String>,
    rater_id: Option<String>,
}

async fn list_ratings(State(state): State<AppState>, Query(f): Query<RatingFilter>) -> Json<Vec<RatingRecord>> {
    let snapshot = state.store.snapshot();
    Json(
        snapshot
            .ratings()
            .filter(|r| f.explanation_id.as_ref().is_none_or(|id| &r.explanation_id == id))
            .filter(|r| f.rater_id.as_ref().is_none_or(|id| &r.rater_id == id))
            .cloned()
            .collect(),
    )
}

/// Mean rating per (subject kind, metric, method, shots, model), three decimals.
pub fn ratings_summary_csv(store: &Store) -> anyhow::Result<String> {
    let snapshot = store.snapshot();
    let mut groups: BTreeMap<(String, String, String, String, String), Vec<u8>> = BTreeMap::new();
    for rating in snapshot.ratings() {
        let Some(stored) = snapshot.explanation(&rating.explanation_id) else { continue };
        let e = &stored.explanation;
        let subject = match e.subject_kind() {
            SubjectKind::InputData => "input",
            SubjectKind::OutputData => "output",
        };
        let key = (
            subject.to_string(),
            rating.metric.as_str().to_string(),
            e.method().as_str().to_string(),
            e.provenance().shots.map(|s| s.to_string()).unwrap_or_default(),
            e.provenance().model_id.clone().unwrap_or_default(),
        );
        groups.entry(key).or_default().push(rating.value);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subjectKind", "metric", "method", "shots", "model", "ratings", "mean"])?;
    for ((subject, metric, method, shots, model), values) in groups {
        let sum: u64 = values.iter().map(|&v| v as u64).sum();
        let mean = BigRational::new(BigInt::from(sum), BigInt::from(values.len()));
        w.write_record([subject, metric, method, shots, model, values.len().to_string(), format_decimal(&mean, 3)])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Every stored rating, one row each.
pub fn ratings_records_csv(store: &Store) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["explanationId", "raterId", "metric", "value", "submittedAt"])?;
    for r in store.snapshot().ratings() {
        w.write_record([&r.explanation_id, &r.rater_id, r.metric.as_str(), &r.value.to_string(), &r.submitted_at])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Debug, Default, Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export_ratings(State(state): State<AppState>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let csv = match q.format.as_deref() {
        None | Some("summary") => ratings_summary_csv(&state.store),
        Some("records") => ratings_records_csv(&state.store),
        Some(other) => return Err(ApiError::bad_request(format!("unknown export format {other}"))),
    }
    .map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ExperimentRequest {
    plan: ExperimentPlan,
    #[serde(default)]
    out_dir: Option<PathBuf>,
    #[serde(default)]
    concurrency: Option<usize>,
}

async fn run_experiment(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ExperimentRequest = parse_body(&body)?;
    blocking(move || {
        let options = RunOptions { concurrency: req.concurrency.unwrap_or(4), triplestore: None };
        let report = match &req.out_dir {
            Some(dir) => experiment::run_to_directory(&req.plan, state.gateway.clone(), &options, dir),
            None => experiment::run(&req.plan, state.gateway.as_ref(), &options),
        }
        .map_err(ApiError::bad_request)?;
        let failed = report.trials.iter().filter(|t| t.error.is_some()).count();
        Ok(json!({ "trials": report.trials.len(), "failed": failed, "matrix": report.matrix }))
    })
    .await
    .map(Json)
}
