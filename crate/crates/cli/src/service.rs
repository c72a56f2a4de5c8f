//! Read-only HTTP API over a loaded graph snapshot.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use powerkg_core::pipeline::load_rules;
use powerkg_core::query::{find_entity, materialize, neighborhood, shortest_path, trace, QueryError, Session};
use powerkg_core::store::{load, EntityId, GraphStore};

use crate::wire::{self, DrillPayload, DrillRequest, ErrorPayload, PathPayload, SearchPayload};

/// A graph with its rules already applied.
#[derive(Debug)]
pub struct Snapshot {
    pub store: GraphStore,
}

impl Snapshot {
    pub fn load(graph: &Path, rules: Option<&Path>) -> anyhow::Result<Snapshot> {
        let mut store = load(graph)?;
        if let Some(r) = rules {
            materialize(&mut store, &load_rules(Some(r))?)?;
        }
        Ok(Snapshot { store })
    }
}

#[derive(Clone)]
pub struct AppState {
    snapshot: Arc<RwLock<Arc<Snapshot>>>,
    graph: PathBuf,
    rules: Option<PathBuf>,
}

impl AppState {
    pub fn open(graph: PathBuf, rules: Option<PathBuf>) -> anyhow::Result<AppState> {
        let snap = Snapshot::load(&graph, rules.as_deref())?;
        Ok(AppState { snapshot: Arc::new(RwLock::new(Arc::new(snap))), graph, rules })
    }

    fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/search", get(search))
        .route("/entity/{id}", get(entity))
        .route("/entity/{id}/neighborhood", get(entity_neighborhood))
        .route("/drill", post(drill))
        .route("/path", get(path))
        .route("/trace/{id}", get(trace_entity))
        .route("/reload", post(reload))
        .with_state(state)
}

pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, kind, message: message.into() }
    }

    fn unknown(id: EntityId) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_entity", format!("unknown entity {id}"))
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> ApiError {
        match e {
            QueryError::UnknownEntity(id) => ApiError::unknown(id),
            QueryError::TargetNotRevealed(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "target_not_revealed", e.to_string()),
            other => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorPayload { error: self.kind.to_string(), message: self.message })).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn check(store: &GraphStore, id: EntityId) -> Result<(), ApiError> {
    store.entity(id).map(|_| ()).ok_or_else(|| ApiError::unknown(id))
}

#[derive(Deserialize)]
struct SearchParams {
    q: String,
}

async fn search(State(state): State<AppState>, Query(p): Query<SearchParams>) -> ApiResult<SearchPayload> {
    let snap = state.current();
    let found = find_entity(&snap.store, &p.q);
    Ok(Json(SearchPayload {
        query: p.q,
        not_found: found.is_none(),
        entity: found.and_then(|id| wire::entity(&snap.store, id)),
    }))
}

async fn entity(State(state): State<AppState>, UrlPath(id): UrlPath<u32>) -> ApiResult<wire::EntityPayload> {
    let snap = state.current();
    wire::entity(&snap.store, EntityId(id)).map(Json).ok_or_else(|| ApiError::unknown(EntityId(id)))
}

#[derive(Deserialize)]
struct DepthParams {
    depth: Option<usize>,
}

pub const MAX_DEPTH: usize = 16;

async fn entity_neighborhood(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<u32>,
    Query(p): Query<DepthParams>,
) -> ApiResult<wire::TreePayload> {
    let depth = p.depth.unwrap_or(1);
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "bad_depth", format!("depth must be 1..={MAX_DEPTH}")));
    }
    let snap = state.current();
    let tree = neighborhood(&snap.store, EntityId(id), depth)?;
    Ok(Json(wire::tree(&snap.store, &tree)))
}

async fn drill(State(state): State<AppState>, Json(req): Json<DrillRequest>) -> ApiResult<DrillPayload> {
    let snap = state.current();
    let store = &snap.store;
    check(store, req.target)?;
    let known = req.edges.map(|edges| edges.into_iter().map(|e| (e.subject, e.predicate, e.object)).collect());
    if !req.revealed.contains(&req.target) && req.root != Some(req.target) {
        return Err(QueryError::TargetNotRevealed(req.target).into());
    }
    let root = req.root.unwrap_or(req.target);
    let mut session = Session::resume(store, root, req.revealed.iter().copied(), known)?;
    let level = session.drill(store, req.target)?;
    Ok(Json(DrillPayload {
        target: wire::entity_ref(store, req.target),
        level: wire::level(store, level),
        revealed: session.revealed.iter().copied().collect(),
    }))
}

#[derive(Deserialize)]
struct PathParams {
    from: u32,
    to: u32,
}

async fn path(State(state): State<AppState>, Query(p): Query<PathParams>) -> ApiResult<PathPayload> {
    let snap = state.current();
    let store = &snap.store;
    let (from, to) = (EntityId(p.from), EntityId(p.to));
    let found = shortest_path(store, from, to)?;
    Ok(Json(PathPayload {
        from: wire::entity_ref(store, from),
        to: wire::entity_ref(store, to),
        no_path: found.is_none(),
        edges: found.unwrap_or_default().iter().map(|e| wire::edge(store, e)).collect(),
    }))
}

async fn trace_entity(State(state): State<AppState>, UrlPath(id): UrlPath<u32>) -> ApiResult<wire::TracePayload> {
    let snap = state.current();
    let t = trace(&snap.store, EntityId(id))?;
    Ok(Json(wire::trace(&snap.store, &t)))
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ReloadPayload {
    pub entities: usize,
    pub triples: usize,
    pub derived: usize,
}

async fn reload(State(state): State<AppState>) -> ApiResult<ReloadPayload> {
    let (graph, rules) = (state.graph.clone(), state.rules.clone());
    let loaded = tokio::task::spawn_blocking(move || Snapshot::load(&graph, rules.as_deref()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "reload_failed", e.to_string()))?;
    let payload = ReloadPayload {
        entities: loaded.store.entity_count(),
        triples: loaded.store.len(),
        derived: loaded.store.derived_count(),
    };
    *state.snapshot.write().expect("snapshot lock") = Arc::new(loaded);
    Ok(Json(payload))
}
