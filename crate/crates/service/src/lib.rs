//! HTTP front end for interactive neighborhood exploration.
//!
//! Sessions hold a zoom state over a shared, content-addressed analysis. See
//! `API.md` in this crate for the request and response shapes.

use std::collections::HashMap;
use std::fs;
use std::hash::Hash;
use std::path::Path;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use fractile::export::stats_json;
use fractile::ifs::{map_to_json, presets};
use fractile::interior::Word;
use fractile::render::{child_boxes, neighborhood_window, render_zoom_frame, DEFAULT_PALETTE};
use fractile::zoom::Action;
use fractile::{Analysis, AnalysisError, AnalysisOptions, IfsSpec, NeighborError, NeighborFilter, ZoomState};

pub const SESSION_CAPACITY: usize = 64;
pub const ANALYSIS_CACHE_CAPACITY: usize = 16;
pub const DEFAULT_VIEW_PIXELS: u32 = 256;
pub const MAX_VIEW_PIXELS: u32 = 2048;
pub const DEFAULT_VIEW_DEPTH: u32 = 10;
pub const MAX_VIEW_DEPTH: u32 = 16;

/// Error body `{"error": message}` with a status code.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> ApiError {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(err: AnalysisError) -> ApiError {
        let status = match err {
            AnalysisError::Neighbor(NeighborError::NotFiniteType { .. } | NeighborError::OverlapDetected { .. }) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: err.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Least-recently-used map; small enough that a linear eviction scan is fine.
struct Lru<K, V> {
    capacity: usize,
    tick: u64,
    entries: HashMap<K, (u64, V)>,
}

impl<K: Eq + Hash + Clone, V> Lru<K, V> {
    fn new(capacity: usize) -> Lru<K, V> {
        Lru {
            capacity,
            tick: 0,
            entries: HashMap::new(),
        }
    }

    fn get_mut(&mut self, key: &K) -> Option<&mut V> {
        self.tick += 1;
        let tick = self.tick;
        self.entries.get_mut(key).map(|(t, v)| {
            *t = tick;
            v
        })
    }

    fn insert(&mut self, key: K, value: V) {
        self.tick += 1;
        if !self.entries.contains_key(&key) && self.entries.len() >= self.capacity {
            let oldest = self.entries.iter().min_by_key(|(_, (t, _))| *t).map(|(k, _)| k.clone());
            if let Some(k) = oldest {
                self.entries.remove(&k);
            }
        }
        self.entries.insert(key, (self.tick, value));
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}

struct Session {
    analysis: Arc<Analysis>,
    name: String,
    state: ZoomState,
}

struct Inner {
    sessions: Lru<String, Session>,
    analyses: Lru<String, Arc<Analysis>>,
    next_id: u64,
}

/// Shared server state: named presets, the session table and the analysis cache.
#[derive(Clone)]
pub struct AppState {
    presets: Arc<HashMap<String, String>>,
    inner: Arc<Mutex<Inner>>,
}

impl Default for AppState {
    fn default() -> AppState {
        AppState::new()
    }
}

impl AppState {
    /// Bundled presets only.
    pub fn new() -> AppState {
        let presets = presets::NAMES
            .iter()
            .filter_map(|&n| presets::source(n).map(|s| (n.to_string(), s.to_string())))
            .collect();
        AppState {
            presets: Arc::new(presets),
            inner: Arc::new(Mutex::new(Inner {
                sessions: Lru::new(SESSION_CAPACITY),
                analyses: Lru::new(ANALYSIS_CACHE_CAPACITY),
                next_id: 1,
            })),
        }
    }

    /// Adds every `*.json` file in `dir` as a preset named by its file stem.
    pub fn with_preset_dir(dir: &Path) -> std::io::Result<AppState> {
        let mut state = AppState::new();
        let mut presets = (*state.presets).clone();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    presets.insert(stem.to_string(), fs::read_to_string(&path)?);
                }
            }
        }
        state.presets = Arc::new(presets);
        Ok(state)
    }

    pub fn session_count(&self) -> usize {
        self.lock().sessions.len()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> ApiResult<T>) -> ApiResult<T> {
        let mut inner = self.lock();
        let session = inner
            .sessions
            .get_mut(&id.to_string())
            .ok_or_else(|| ApiError::not_found(format!("no session {id}")))?;
        f(session)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/presets", get(list_presets))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/zoom", post(zoom))
        .route("/sessions/{id}/view.png", get(view_png))
        .route("/sessions/{id}/stats", get(get_stats))
        .route("/sessions/{id}/neighborhoods/{k}", get(get_neighborhood))
        .with_state(state)
}

async fn list_presets(State(app): State<AppState>) -> Json<Value> {
    let mut names: Vec<&String> = app.presets.keys().collect();
    names.sort();
    Json(json!({ "presets": names }))
}

/// Body of `POST /sessions`. Either `preset` or `spec` names the system; a bare IFS
/// document (top-level `maps`) is accepted as `spec`.
#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    preset: Option<String>,
    spec: Option<Value>,
    maps: Option<Value>,
    name: Option<String>,
    filter: Option<String>,
    seed_word: Option<String>,
    seed: Option<u64>,
}

fn parse_create(body: &[u8], presets: &HashMap<String, String>) -> ApiResult<(IfsSpec, AnalysisOptions, u64)> {
    let req: CreateRequest =
        serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
    let spec = match (&req.preset, &req.spec, &req.maps) {
        (Some(name), None, None) => {
            let text = presets
                .get(name)
                .ok_or_else(|| ApiError::bad_request(format!("unknown preset {name:?}")))?;
            IfsSpec::parse(text)
        }
        (None, Some(spec), None) => IfsSpec::from_json(spec),
        (None, None, Some(maps)) => {
            let mut doc = json!({ "maps": maps });
            if let Some(name) = &req.name {
                doc["name"] = json!(name);
            }
            IfsSpec::from_json(&doc)
        }
        _ => return Err(ApiError::bad_request("give exactly one of preset, spec or maps")),
    }
    .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let filter = match req.filter.as_deref() {
        None => NeighborFilter::default(),
        Some(f) => f.parse().map_err(ApiError::bad_request)?,
    };
    let seed_word = req
        .seed_word
        .as_deref()
        .map(|w| Word::parse(w, spec.len()))
        .transpose()
        .map_err(ApiError::bad_request)?;
    let opts = AnalysisOptions {
        filter,
        seed_word,
        ..AnalysisOptions::default()
    };
    Ok((spec, opts, req.seed.unwrap_or(0)))
}

/// Content hash of everything that determines an analysis; the display name is excluded.
fn analysis_key(spec: &IfsSpec, opts: &AnalysisOptions) -> String {
    let maps: Vec<Value> = spec.maps.iter().map(map_to_json).collect();
    let mut hasher = Sha256::new();
    hasher.update(Value::Array(maps).to_string().as_bytes());
    hasher.update(format!("|{}|{}|", opts.filter, opts.candidate_cap).as_bytes());
    if let Some(w) = &opts.seed_word {
        hasher.update(w.to_string().as_bytes());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let (spec, opts, seed) = parse_create(&body, &app.presets)?;
    let key = analysis_key(&spec, &opts);
    let cached = app.lock().analyses.get_mut(&key).cloned();
    let analysis = match cached {
        Some(a) => a,
        None => {
            let spec = spec.clone();
            let a = tokio::task::spawn_blocking(move || Analysis::run(&spec, &opts))
                .await
                .map_err(|e| ApiError {
                    status: StatusCode::INTERNAL_SERVER_ERROR,
                    message: e.to_string(),
                })??;
            let a = Arc::new(a);
            app.lock().analyses.insert(key, a.clone());
            a
        }
    };
    let session = Session {
        analysis,
        name: spec.name.clone(),
        state: ZoomState::new(0, seed),
    };
    let body = {
        let mut inner = app.lock();
        let id = format!("s{:06}", inner.next_id);
        inner.next_id += 1;
        let mut body = session_json(&session);
        body["sessionId"] = json!(id);
        inner.sessions.insert(id, session);
        body
    };
    tracing::info!(session = %body["sessionId"], "created");
    Ok((StatusCode::CREATED, Json(body)))
}

fn summary_json(name: &str, a: &Analysis) -> Value {
    let g = &a.graph;
    json!({
        "name": name,
        "m": g.m(),
        "filter": a.neighborhoods.filter.to_string(),
        "seedWord": a.neighborhoods.seed.to_string(),
        "K": a.neighborhoods.len(),
        "neighbors": g.neighbor_count(),
        "points": g.point_count(),
        "continuum": g.continuum_count(),
        "edges": g.edge_count(),
        "attractorDimension": g.spec.attractor_dimension(),
        "boundaryDimension": g.boundary_dimension(),
        "connected": g.is_connected(),
        "stationaryExact": a.stationary.is_exact(),
        "stats": stats_json(&a.stats),
    })
}

fn state_json(a: &Analysis, st: &ZoomState) -> Value {
    let boxes: Vec<Value> = child_boxes(&a.graph.spec)
        .iter()
        .map(|(lo, hi)| json!([lo.re, lo.im, hi.re, hi.im]))
        .collect();
    json!({
        "current": st.current + 1,
        "p": a.stationary.p[st.current],
        "size": a.neighborhoods.nbhs[st.current].len(),
        "stepCount": st.step_count,
        "depth": st.history.len(),
        "returnChild": st.return_child,
        "childBoxes": boxes,
    })
}

fn session_json(s: &Session) -> Value {
    json!({
        "summary": summary_json(&s.name, &s.analysis),
        "state": state_json(&s.analysis, &s.state),
    })
}

async fn get_session(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    app.with_session(&id, |s| {
        let mut body = session_json(s);
        body["sessionId"] = json!(id);
        Ok(Json(body))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZoomRequest {
    action: String,
    child: Option<u8>,
}

fn parse_zoom(body: &[u8]) -> ApiResult<Action> {
    let req: ZoomRequest =
        serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
    match (req.action.as_str(), req.child) {
        ("in", Some(child)) => Ok(Action::In(child)),
        ("in", None) => Err(ApiError::bad_request("zoom in needs a child label")),
        ("out", None) => Ok(Action::Out),
        ("out", Some(_)) => Err(ApiError::bad_request("zoom out takes no child label")),
        (other, _) => Err(ApiError::bad_request(format!("unknown action {other:?}"))),
    }
}

async fn zoom(State(app): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let action = parse_zoom(&body)?;
    app.with_session(&id, |s| {
        s.state
            .step(&s.analysis.model, action)
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        Ok(Json(json!({
            "sessionId": id,
            "action": action.to_string(),
            "state": state_json(&s.analysis, &s.state),
        })))
    })
}

#[derive(Deserialize)]
struct ViewQuery {
    pixels: Option<u32>,
    depth: Option<u32>,
}

fn encode_png(width: u32, height: u32, rgb: &[u8]) -> Result<Vec<u8>, image::ImageError> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out).write_image(rgb, width, height, ExtendedColorType::Rgb8)?;
    Ok(out)
}

async fn view_png(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ViewQuery>,
) -> ApiResult<Response> {
    let pixels = q.pixels.unwrap_or(DEFAULT_VIEW_PIXELS);
    let depth = q.depth.unwrap_or(DEFAULT_VIEW_DEPTH);
    if !(16..=MAX_VIEW_PIXELS).contains(&pixels) {
        return Err(ApiError::bad_request(format!("pixels must be in 16..={MAX_VIEW_PIXELS}")));
    }
    if depth > MAX_VIEW_DEPTH {
        return Err(ApiError::bad_request(format!("depth must be at most {MAX_VIEW_DEPTH}")));
    }
    let (analysis, current) = app.with_session(&id, |s| Ok((s.analysis.clone(), s.state.current)))?;
    let png = tokio::task::spawn_blocking(move || {
        let g = &analysis.graph;
        let win = neighborhood_window(g, pixels);
        let raster = render_zoom_frame(g, &analysis.neighborhoods.nbhs[current], win, depth, &DEFAULT_PALETTE);
        encode_png(raster.width, raster.height, &raster.data)
    })
    .await
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: e.to_string(),
    })?
    .map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: e.to_string(),
    })?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn get_stats(State(app): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    app.with_session(&id, |s| {
        let a = &s.analysis;
        Ok(Json(json!({
            "stats": stats_json(&a.stats),
            "stationary": a.stationary.p,
            "stationaryExact": a.stationary.exact.as_ref().map(|v| v.iter().map(ToString::to_string).collect::<Vec<_>>()),
        })))
    })
}

async fn get_neighborhood(
    State(app): State<AppState>,
    UrlPath((id, k)): UrlPath<(String, usize)>,
) -> ApiResult<Json<Value>> {
    app.with_session(&id, |s| {
        let a = &s.analysis;
        let ng = &a.neighborhoods;
        if k == 0 || k > ng.len() {
            return Err(ApiError::not_found(format!("neighborhood {k} is not in 1..={}", ng.len())));
        }
        let members: Vec<Value> = ng.nbhs[k - 1]
            .members()
            .iter()
            .map(|&v| {
                let f = &a.graph.vertices[v as usize];
                json!({ "vertex": v, "map": map_to_json(f), "display": f.to_string() })
            })
            .collect();
        let successors: Vec<u32> = ng.successors(k - 1).iter().map(|&x| x + 1).collect();
        Ok(Json(json!({
            "index": k,
            "members": members,
            "p": a.stationary.p[k - 1],
            "pExact": a.stationary.exact.as_ref().map(|v| v[k - 1].to_string()),
            "successors": successors,
        })))
    })
}
