//! HTTP JSON API over a [`SessionStore`].
//!
//! Every JSON response carries the session `version`; SVG and CSV responses
//! carry it in the `x-session-version` header. Store calls block on file IO
//! and per-session locks, so they run on the blocking pool.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use municlust::analysis::{Analysis, AnalysisOptions};
use municlust::ingest::{AttributeSchema, Format, ParseOptions};
use municlust::pipeline::{render_artifacts, PipelineConfig, Provenance, TOOL, VERSION};
use municlust::report::Scale;
use municlust::session::{Session, SessionError, SessionStore};
use municlust::svg::ChartKind;
use municlust::taxonomy::{CutRequest, OverrideEntry, Target};

const MAX_UPLOAD: usize = 32 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
}

/// An error response: `{"error": ..., "version": ...}` with the mapped status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    version: Option<u64>,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
            version: None,
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let version = match &e {
            SessionError::StaleVersion { current, .. } => Some(*current),
            _ => None,
        };
        ApiError {
            status: StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
            message: e.to_string(),
            version,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            log::error!("{}", self.message);
        }
        let body = Json(json!({ "error": self.message, "version": self.version }));
        (self.status, body).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::from(SessionError::Storage(e.to_string())))?
        .map_err(ApiError::from)
}

/// `value` serialized as an object with `version` added.
fn versioned(version: u64, value: impl Serialize) -> ApiResult<Json<Value>> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| ApiError::from(SessionError::Storage(e.to_string())))?;
    match v.as_object_mut() {
        Some(o) => {
            o.insert("version".into(), version.into());
        }
        None => v = json!({ "version": version, "data": v }),
    }
    Ok(Json(v))
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info))
        .route("/sessions/{id}/dendrogram", get(dendrogram))
        .route("/sessions/{id}/cut", post(cut))
        .route("/sessions/{id}/assignment", get(assignment))
        .route("/sessions/{id}/overrides", post(add_override).get(ledger))
        .route("/sessions/{id}/weights", put(set_weights))
        .route("/sessions/{id}/indicator", get(indicator))
        .route("/sessions/{id}/stats", get(stats))
        .route("/sessions/{id}/charts/{file}", get(chart))
        .route("/sessions/{id}/export.csv", get(export_csv))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD))
        .with_state(AppState { store })
}

/// The API router, plus static explorer assets at `/` when `ui_dir` is set.
pub fn app(store: Arc<SessionStore>, ui_dir: Option<PathBuf>) -> Router {
    let api = router(store);
    match ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

fn summary(s: &Session) -> Value {
    let a = &s.analysis;
    json!({
        "id": s.id,
        "version": s.version,
        "created": s.created,
        "modified": s.modified,
        "input_sha256": s.input_sha256,
        "n": a.dataset.len(),
        "codes": a.dataset.schema.codes(),
        "linkage": a.tree.linkage,
        "cut": a.taxonomy.base_cut.request,
        "group_count": a.taxonomy.base_cut.group_count(),
        "labels": a.taxonomy.labels,
    })
}

/// Multipart fields: `file` (required, the table), `format` (`csv` or
/// `json`), `schema` (attribute schema JSON), `options` (analysis options
/// JSON), `decimal_comma` and `impute_missing` (`true`/`false`).
async fn create_session(
    State(st): State<AppState>,
    mut form: Multipart,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let mut file: Option<(Vec<u8>, Option<String>)> = None;
    let mut format: Option<Format> = None;
    let mut parse = ParseOptions::default();
    let mut opts = AnalysisOptions::default();
    let bad = |e: &dyn std::fmt::Display| ApiError::bad_request(e.to_string());
    while let Some(field) = form.next_field().await.map_err(|e| bad(&e))? {
        let name = field.name().unwrap_or_default().to_string();
        match name.as_str() {
            "file" => {
                let fname = field.file_name().map(str::to_string);
                let bytes = field.bytes().await.map_err(|e| bad(&e))?;
                file = Some((bytes.to_vec(), fname));
            }
            other => {
                let text = field.text().await.map_err(|e| bad(&e))?;
                match other {
                    "format" => format = Some(text.parse().map_err(|e: String| bad(&e))?),
                    "schema" => {
                        parse.schema = Some(
                            serde_json::from_str::<AttributeSchema>(&text)
                                .map_err(|e| bad(&format!("schema: {e}")))?,
                        )
                    }
                    "options" => {
                        opts = serde_json::from_str(&text)
                            .map_err(|e| bad(&format!("options: {e}")))?
                    }
                    "decimal_comma" => parse.decimal_comma = text.trim() == "true",
                    "impute_missing" => parse.impute_missing = text.trim() == "true",
                    _ => return Err(bad(&format!("unexpected field \"{other}\""))),
                }
            }
        }
    }
    let (bytes, fname) = file.ok_or_else(|| ApiError::bad_request("missing \"file\" field"))?;
    let format = format.unwrap_or_else(|| match fname {
        Some(f) => Format::from_path(std::path::Path::new(&f)),
        None => Format::Csv,
    });
    let s = blocking(move || st.store.create(&bytes, format, &parse, &opts)).await?;
    log::info!(
        "created session {} ({} entities)",
        s.id,
        s.analysis.dataset.len()
    );
    Ok((StatusCode::CREATED, Json(summary(&s))))
}

async fn load(st: &AppState, id: String) -> ApiResult<Session> {
    let store = st.store.clone();
    blocking(move || store.get(&id)).await
}

async fn session_info(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Value>> {
    Ok(Json(summary(&load(&st, id).await?)))
}

async fn dendrogram(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = load(&st, id).await?;
    let a = &s.analysis;
    versioned(
        s.version,
        json!({
            "n": a.tree.n,
            "linkage": a.tree.linkage,
            "ids": a.dataset.ids(),
            "names": a.dataset.entities.iter().map(|e| &e.name).collect::<Vec<_>>(),
            "merges": a.tree.merges,
            "cut": a.taxonomy.base_cut.request,
        }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutBody {
    mode: String,
    value: f64,
    #[serde(default)]
    base_version: Option<u64>,
    #[serde(default)]
    mapping: Option<BTreeMap<u32, String>>,
}

impl CutBody {
    fn request(&self) -> ApiResult<CutRequest> {
        match self.mode.as_str() {
            "by-count" | "count" | "k" => {
                if self.value.fract() != 0.0 || self.value < 0.0 {
                    return Err(ApiError::bad_request(format!(
                        "cut count must be a non-negative integer, got {}",
                        self.value
                    )));
                }
                Ok(CutRequest::ByCount(self.value as usize))
            }
            "by-height" | "height" => Ok(CutRequest::ByHeight(self.value)),
            m => Err(ApiError::bad_request(format!(
                "unknown cut mode \"{m}\" (expected by-count or by-height)"
            ))),
        }
    }
}

fn body<T>(r: Result<Json<T>, axum::extract::rejection::JsonRejection>) -> ApiResult<T> {
    r.map(|Json(t)| t)
        .map_err(|e| ApiError::bad_request(e.body_text()))
}

async fn cut(
    State(st): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<CutBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let b = body(req)?;
    let request = b.request()?;
    let store = st.store.clone();
    let s = blocking(move || store.cut(&id, b.base_version, request, b.mapping.as_ref())).await?;
    versioned(s.version, assignment_body(&s.analysis))
}

fn assignment_body(a: &Analysis) -> Value {
    let ts = &a.taxonomy;
    let entries: Vec<Value> = a
        .dataset
        .entities
        .iter()
        .enumerate()
        .map(|(i, e)| {
            json!({
                "id": e.id,
                "name": e.name,
                "group": ts.base_cut.assignment[i],
                "label": ts.effective_assignment[i],
            })
        })
        .collect();
    json!({
        "cut": ts.base_cut.request,
        "group_count": ts.base_cut.group_count(),
        "category_map": ts.category_map,
        "labels": ts.labels,
        "entries": entries,
        "ledger_length": ts.overrides.len(),
    })
}

async fn assignment(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = load(&st, id).await?;
    versioned(s.version, assignment_body(&s.analysis))
}

async fn ledger(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = load(&st, id).await?;
    versioned(
        s.version,
        json!({ "overrides": s.analysis.taxonomy.overrides }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideBody {
    target: Target,
    to_label: String,
    rationale: String,
    base_version: u64,
    #[serde(default)]
    author: String,
}

async fn add_override(
    State(st): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<OverrideBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let b = body(req)?;
    if b.rationale.trim().is_empty() {
        return Err(ApiError::bad_request("rationale must not be empty"));
    }
    let entry = OverrideEntry {
        target: b.target,
        from_label: String::new(),
        to_label: b.to_label,
        author: b.author,
        rationale: b.rationale,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    };
    let store = st.store.clone();
    let s = blocking(move || store.add_override(&id, b.base_version, entry)).await?;
    let entry = s.analysis.taxonomy.overrides.last().cloned();
    let mut v = assignment_body(&s.analysis);
    v["entry"] = serde_json::to_value(entry).unwrap_or(Value::Null);
    versioned(s.version, v)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsBody {
    w: Vec<f64>,
    #[serde(default)]
    base_version: Option<u64>,
}

async fn set_weights(
    State(st): State<AppState>,
    Path(id): Path<String>,
    req: Result<Json<WeightsBody>, axum::extract::rejection::JsonRejection>,
) -> ApiResult<Json<Value>> {
    let b = body(req)?;
    let store = st.store.clone();
    let s = blocking(move || store.set_weights(&id, b.base_version, &b.w)).await?;
    versioned(s.version, indicator_body(&s.analysis))
}

fn indicator_body(a: &Analysis) -> Value {
    let ts = &a.taxonomy;
    let values: Vec<Value> = a
        .dataset
        .entities
        .iter()
        .enumerate()
        .map(|(i, e)| json!({ "id": e.id, "label": ts.effective_assignment[i], "nl2": a.indicator.values[i] }))
        .collect();
    json!({
        "codes": a.dataset.schema.codes(),
        "weights": a.indicator_config.weights(),
        "values": values,
        "summary": a.indicator.summarize(ts),
    })
}

async fn indicator(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = load(&st, id).await?;
    versioned(s.version, indicator_body(&s.analysis))
}

async fn stats(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let s = load(&st, id).await?;
    let stats = s
        .analysis
        .stats(Scale::Raw, None)
        .map_err(|e| ApiError::from(SessionError::from(e)))?;
    versioned(s.version, stats)
}

/// The provenance record attached to artifacts rendered from a session.
pub fn session_provenance(s: &Session) -> Provenance {
    let a = &s.analysis;
    Provenance {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        input_sha256: s.input_sha256.clone(),
        config: PipelineConfig {
            input: PathBuf::from(format!("session:{}@{}", s.id, s.version)),
            linkage: a.tree.linkage,
            cut: a.taxonomy.base_cut.request,
            weights: Some(a.indicator_config.weights().to_vec()),
            extra_charts: true,
            ..Default::default()
        },
    }
}

/// Every artifact of the session's current state, as `(file name, body)`.
pub fn session_artifacts(s: &Session) -> Result<Vec<(String, String)>, String> {
    render_artifacts(
        &s.analysis,
        &session_provenance(s),
        Scale::Raw,
        None,
        true,
        &[],
    )
    .map_err(|e| e.to_string())
}

fn text_response(version: u64, content_type: &'static str, body: String) -> Response {
    let mut r = body.into_response();
    let h = r.headers_mut();
    h.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    h.insert("x-session-version", HeaderValue::from(version));
    r
}

fn artifact(s: &Session, name: &str) -> ApiResult<String> {
    session_artifacts(s)
        .map_err(|e| ApiError::from(SessionError::Storage(e)))?
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, body)| body)
        .ok_or_else(|| {
            SessionError::NotFound(format!("{name} is not available for this session")).into()
        })
}

async fn chart(
    State(st): State<AppState>,
    Path((id, file)): Path<(String, String)>,
) -> ApiResult<Response> {
    let kind: ChartKind = file
        .strip_suffix(".svg")
        .ok_or_else(|| SessionError::NotFound(file.clone()))?
        .parse()
        .map_err(|e: municlust::report::ReportError| SessionError::NotFound(e.to_string()))?;
    let s = load(&st, id).await?;
    let name = format!("{}.svg", kind.as_str().replace('-', "_"));
    let svg = artifact(&s, &name)?;
    Ok(text_response(s.version, "image/svg+xml", svg))
}

async fn export_csv(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = load(&st, id).await?;
    let csv = artifact(&s, "assignments.csv")?;
    Ok(text_response(s.version, "text/csv; charset=utf-8", csv))
}
