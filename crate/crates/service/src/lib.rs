//! HTTP front end for interactive sessions.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gradarg_core::analysis::{
    base_score_sweep, distribution_rows, enumerate_decisions, sweep_rows, unit_grid, write_csv, EnumerationFilter,
};
use gradarg_core::corpus::{list_corpora, load_corpus};
use gradarg_core::dynamics::Edit;
use gradarg_core::session::{DecisionRequest, Role, SessionSource, SessionStore};
use gradarg_core::{ArgumentId, Error, SemanticsKind};

/// Error body returned by every failing endpoint.
#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    pub detail: Value,
}

pub struct Failure(Error);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e)
    }
}

impl From<JsonRejection> for Failure {
    fn from(r: JsonRejection) -> Self {
        Failure(Error::BadRequest(r.body_text()))
    }
}

impl From<QueryRejection> for Failure {
    fn from(r: QueryRejection) -> Self {
        Failure(Error::BadRequest(r.body_text()))
    }
}

fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::UnknownSession(_) | Error::UnknownCorpus(_) | Error::OutOfRange(_) => StatusCode::NOT_FOUND,
        Error::Forbidden(_) => StatusCode::FORBIDDEN,
        Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        Error::BadRequest(_) => StatusCode::BAD_REQUEST,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

fn detail_of(e: &Error) -> Value {
    match e {
        Error::InvalidAf(errors) => Value::Array(
            errors
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "line": p.line,
                        "column": p.column,
                        "code": p.code.as_str(),
                        "message": p.message,
                    })
                })
                .collect(),
        ),
        Error::InvalidStructure(report) => serde_json::to_value(report).unwrap_or(Value::Null),
        _ => Value::Null,
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let status = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        let body = ApiError {
            code: self.0.code().to_string(),
            message: self.0.to_string(),
            detail: detail_of(&self.0),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, Failure>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Name of a bundled corpus.
    #[serde(default)]
    pub corpus: Option<String>,
    /// Framework document text, as an alternative to `corpus`.
    #[serde(default)]
    pub af: Option<String>,
    #[serde(default)]
    pub participants: BTreeMap<String, Role>,
}

#[derive(Debug, Deserialize)]
pub struct PostEvent {
    pub actor: String,
    pub edit: Edit,
}

#[derive(Debug, Default, Deserialize)]
pub struct DecisionBody {
    #[serde(default)]
    pub actor: Option<String>,
    #[serde(flatten)]
    pub request: DecisionRequest,
}

#[derive(Debug, Deserialize)]
pub struct SemanticsQuery {
    #[serde(default)]
    pub semantics: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepQuery {
    #[serde(default)]
    pub semantics: Option<String>,
    /// Defaults to the scenario's risk argument.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionQuery {
    #[serde(default)]
    pub semantics: Option<String>,
    /// `pruned` (default) or `literal`.
    #[serde(default)]
    pub no_risk_mode: Option<String>,
}

/// Upper bound on sweep grid points accepted over HTTP.
pub const MAX_SWEEP_STEPS: usize = 101;

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub name: String,
    pub description: String,
    pub arguments: usize,
    pub relations: usize,
    pub toggles: Vec<String>,
}

pub fn router(store: Arc<SessionStore>) -> Router {
    Router::new()
        .route("/corpora", get(corpora))
        .route("/corpora/{name}/distribution", get(distribution_csv))
        .route("/corpora/{name}/sweep", get(sweep_csv))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/decision", post(request_decision))
        .route("/sessions/{id}/decisions/{k}/explanation", get(explanation))
        .route("/sessions/{id}/strengths", get(strengths))
        .with_state(store)
}

async fn corpora() -> ApiResult<Vec<CorpusInfo>> {
    let mut out = Vec::new();
    for name in list_corpora() {
        let c = load_corpus(name)?;
        out.push(CorpusInfo {
            name: c.name,
            description: c.descriptor.description,
            arguments: c.framework.len(),
            relations: c.framework.relation_count(),
            toggles: c.descriptor.toggles,
        });
    }
    Ok(Json(out))
}

fn semantics_of(s: Option<String>) -> Result<SemanticsKind, Error> {
    s.map_or(Ok(SemanticsKind::default()), |s| s.parse())
}

fn csv_response(rows: Result<Vec<u8>, Error>) -> Result<Response, Failure> {
    let body = rows?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> Result<T, Error> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| Error::Io(e.to_string()))?
}

/// Table rows for a bundled scenario: all combinations, risk active, without risk.
async fn distribution_csv(
    State(store): State<Arc<SessionStore>>,
    Path(name): Path<String>,
    q: Result<Query<DistributionQuery>, QueryRejection>,
) -> Result<Response, Failure> {
    let Query(q) = q?;
    let kind = semantics_of(q.semantics)?;
    let cfg = *store.config();
    let rows = blocking(move || {
        let corpus = load_corpus(&name)?;
        let without = match q.no_risk_mode.as_deref() {
            None | Some("pruned") => corpus.scenario.without_risk.clone(),
            Some("literal") => corpus.literal_without_risk()?,
            Some(other) => return Err(Error::BadRequest(format!("unknown no_risk_mode `{other}`"))),
        };
        let filters = [
            EnumerationFilter::All,
            EnumerationFilter::Active { id: corpus.risk()? },
            EnumerationFilter::Without(without),
        ];
        let sc = &corpus.scenario;
        let tables = filters
            .iter()
            .map(|f| enumerate_decisions(sc, f, kind, &cfg.eval, cfg.tie_epsilon))
            .collect::<Result<Vec<_>, Error>>()?;
        let mut buf = Vec::new();
        write_csv(&mut buf, &distribution_rows(&tables, &sc.pair.0, &sc.pair.1))?;
        Ok(buf)
    })
    .await;
    csv_response(rows)
}

/// Base-score sweep of one argument over an evenly spaced grid.
async fn sweep_csv(
    State(store): State<Arc<SessionStore>>,
    Path(name): Path<String>,
    q: Result<Query<SweepQuery>, QueryRejection>,
) -> Result<Response, Failure> {
    let Query(q) = q?;
    let kind = semantics_of(q.semantics)?;
    let steps = q.steps.unwrap_or(11);
    if steps == 0 || steps > MAX_SWEEP_STEPS {
        return Err(Error::BadRequest(format!("steps must be in 1..={MAX_SWEEP_STEPS}")).into());
    }
    let cfg = *store.config();
    let rows = blocking(move || {
        let corpus = load_corpus(&name)?;
        let target = match q.target {
            Some(t) => ArgumentId::new(&t)?,
            None => corpus.risk()?,
        };
        let result = base_score_sweep(
            &corpus.scenario,
            &target,
            &unit_grid(steps),
            kind,
            &cfg.eval,
            cfg.tie_epsilon,
        )?;
        let mut buf = Vec::new();
        write_csv(&mut buf, &sweep_rows(&result))?;
        Ok(buf)
    })
    .await;
    csv_response(rows)
}

async fn create_session(
    State(store): State<Arc<SessionStore>>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), Failure> {
    let Json(body) = body?;
    let source = match (body.corpus, body.af) {
        (Some(name), None) => SessionSource::Corpus { name },
        (None, Some(text)) => SessionSource::Upload { text },
        _ => return Err(Error::BadRequest("give exactly one of `corpus` or `af`".into()).into()),
    };
    let view = store.create(source, body.participants)?;
    tracing::info!(session = %view.id, "session created");
    Ok((
        StatusCode::CREATED,
        Json(serde_json::to_value(view).map_err(|e| Error::Io(e.to_string()))?),
    ))
}

async fn get_session(State(store): State<Arc<SessionStore>>, Path(id): Path<String>) -> ApiResult<Value> {
    let view = store.view(&id)?;
    Ok(Json(serde_json::to_value(view).map_err(|e| Error::Io(e.to_string()))?))
}

async fn post_event(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Result<Json<PostEvent>, JsonRejection>,
) -> ApiResult<Value> {
    let Json(body) = body?;
    let outcome = store.post_event(&id, &body.actor, body.edit)?;
    Ok(Json(
        serde_json::to_value(outcome).map_err(|e| Error::Io(e.to_string()))?,
    ))
}

async fn request_decision(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    body: Option<Json<DecisionBody>>,
) -> ApiResult<Value> {
    let body = body.map(|Json(b)| b).unwrap_or_default();
    let resolution = store.request_decision(&id, body.actor.as_deref(), body.request)?;
    Ok(Json(
        serde_json::to_value(resolution).map_err(|e| Error::Io(e.to_string()))?,
    ))
}

async fn explanation(
    State(store): State<Arc<SessionStore>>,
    Path((id, k)): Path<(String, String)>,
) -> ApiResult<Value> {
    let index: i64 = k
        .parse()
        .map_err(|_| Error::BadRequest(format!("bad decision index `{k}`")))?;
    let explanation = blocking(move || store.explanation(&id, index)).await?;
    Ok(Json(
        serde_json::to_value(explanation).map_err(|e| Error::Io(e.to_string()))?,
    ))
}

async fn strengths(
    State(store): State<Arc<SessionStore>>,
    Path(id): Path<String>,
    q: Result<Query<SemanticsQuery>, QueryRejection>,
) -> ApiResult<Value> {
    let Query(q) = q?;
    let kind = semantics_of(q.semantics)?;
    let map = store.strengths(&id, kind)?;
    Ok(Json(serde_json::to_value(map).map_err(|e| Error::Io(e.to_string()))?))
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, sessions = store.len(), "listening");
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
