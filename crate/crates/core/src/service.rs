//! HTTP/JSON + server-sent-events front end over the frame store.
//!
//! Raw frames posted to the service are queued for automatic correction
//! when a default method is configured; every stored corrected frame is
//! announced on `/stream`.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::Stream;
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, mpsc};

use crate::error::{Error, Result};
use crate::frame::api::{frame_for_api, stats_for_api, ApiMask, ApiSceneSpec};
use crate::frame::{
    render_synthetic_frame, roi_stats, CorrectionMethod, Corrector, FrameKind, FrameMeta, FrameStore, ParameterMask,
    RoiGeometry, TimeseriesPoint,
};
use crate::inverse::SolverConfig;
use crate::quadrature::QuadratureConfig;
use crate::radiometry::CELSIUS_OFFSET;
use crate::surrogate::MlpModel;

pub const MAX_FRAME_PIXELS: usize = 4096 * 4096;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub model: Option<Arc<MlpModel>>,
    /// Method applied to newly ingested frames; none disables the queue.
    pub auto_correct: Option<CorrectionMethod>,
    pub solver: SolverConfig,
    pub quadrature: QuadratureConfig,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            model: None,
            auto_correct: Some(CorrectionMethod::Bisection),
            solver: SolverConfig::default(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

pub struct AppState {
    store: FrameStore,
    model: Option<Arc<MlpModel>>,
    solver: SolverConfig,
    quadrature: QuadratureConfig,
    auto_correct: Option<CorrectionMethod>,
    events: broadcast::Sender<FrameMeta>,
    queue: Option<mpsc::UnboundedSender<String>>,
}

impl AppState {
    pub fn store(&self) -> &FrameStore {
        &self.store
    }

    fn corrector(&self, method: CorrectionMethod) -> Result<Corrector<'_>> {
        match method {
            CorrectionMethod::Bisection => Ok(Corrector::Bisection),
            CorrectionMethod::Surrogate => self
                .model
                .as_deref()
                .map(Corrector::Surrogate)
                .ok_or_else(|| Error::domain("no surrogate model loaded")),
        }
    }

    fn correct_and_announce(&self, id: &str, method: CorrectionMethod) -> Result<FrameMeta> {
        let out = self.store.correct(id, self.corrector(method)?, &self.solver, &self.quadrature)?;
        // nobody listening is fine
        let _ = self.events.send(out.meta.clone());
        Ok(out.meta)
    }
}

/// Builds the shared state and, if auto-correction is on, starts the
/// worker draining the ingestion queue. Must run inside a Tokio runtime.
pub fn build_state(cfg: ServiceConfig) -> Result<Arc<AppState>> {
    let store = FrameStore::open(&cfg.data_dir)?;
    let (events, _) = broadcast::channel(256);
    let (tx, rx) = match cfg.auto_correct {
        Some(_) => {
            let (tx, rx) = mpsc::unbounded_channel();
            (Some(tx), Some(rx))
        }
        None => (None, None),
    };
    let state = Arc::new(AppState {
        store,
        model: cfg.model,
        solver: cfg.solver,
        quadrature: cfg.quadrature,
        auto_correct: cfg.auto_correct,
        events,
        queue: tx,
    });
    if let (Some(mut rx), Some(method)) = (rx, cfg.auto_correct) {
        let worker = Arc::downgrade(&state);
        tokio::spawn(async move {
            while let Some(id) = rx.recv().await {
                let Some(st) = worker.upgrade() else { break };
                let _ = tokio::task::spawn_blocking(move || st.correct_and_announce(&id, method)).await;
            }
        });
    }
    Ok(state)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/cameras", get(list_cameras))
        .route("/frames", get(list_frames))
        .route("/frames/synthetic", post(post_synthetic))
        .route("/frames/{id}", get(get_frame))
        .route("/frames/{id}/meta", get(get_frame_meta))
        .route("/frames/{id}/correct", post(post_correct))
        .route("/masks/{camera}", put(put_mask).get(get_mask))
        .route("/roi/query", post(post_roi_query))
        .route("/roi/timeseries", get(get_timeseries))
        .route("/stream", get(get_stream))
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, cfg: ServiceConfig) -> Result<()> {
    let state = build_state(cfg)?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr.to_string(), e))?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr.to_string(), e))
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Io { .. } | Error::Training { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::domain(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

fn now_ms() -> i64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as i64)
}

async fn list_cameras(State(st): State<Arc<AppState>>) -> Json<Vec<String>> {
    Json(st.store.cameras())
}

#[derive(Debug, Deserialize)]
struct FrameQuery {
    camera: Option<String>,
    from: Option<i64>,
    to: Option<i64>,
    kind: Option<FrameKind>,
}

async fn list_frames(State(st): State<Arc<AppState>>, Query(q): Query<FrameQuery>) -> ApiResult<Json<Vec<FrameMeta>>> {
    Ok(Json(st.store.list(q.camera.as_deref(), q.from, q.to, q.kind)?))
}

async fn post_synthetic(
    State(st): State<Arc<AppState>>,
    Json(body): Json<ApiSceneSpec>,
) -> ApiResult<(StatusCode, Json<FrameMeta>)> {
    if body.width.saturating_mul(body.height) > MAX_FRAME_PIXELS {
        return Err(Error::domain("frame too large").into());
    }
    let state = st.clone();
    let meta = blocking(move || {
        let mut spec = body.to_spec();
        crate::frame::validate_camera_id(&spec.camera_id)?;
        spec.timestamp_ms.get_or_insert_with(now_ms);
        let frame = render_synthetic_frame(&spec, body.width, body.height, &state.solver, &state.quadrature)?;
        if state.store.mask(&spec.camera_id).is_err() {
            state.store.upsert_mask(&spec.camera_id, spec.generating_mask(body.height))?;
        }
        state.store.insert_raw(frame)
    })
    .await?;
    if let Some(tx) = &st.queue {
        let _ = tx.send(meta.frame_id.clone());
    }
    Ok((StatusCode::CREATED, Json(meta)))
}

async fn get_frame(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let bytes = blocking(move || Ok(frame_for_api(&st.store.fetch(&id)?).encode())).await?;
    Ok(([(header::CONTENT_TYPE, "application/octet-stream")], Bytes::from(bytes)).into_response())
}

async fn get_frame_meta(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<FrameMeta>> {
    Ok(Json(st.store.meta(&id)?))
}

#[derive(Debug, Deserialize)]
struct CorrectBody {
    method: Option<CorrectionMethod>,
}

async fn post_correct(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Option<Json<CorrectBody>>,
) -> ApiResult<Json<FrameMeta>> {
    let method = body
        .and_then(|b| b.0.method)
        .or(st.auto_correct)
        .unwrap_or(CorrectionMethod::Bisection);
    Ok(Json(blocking(move || st.correct_and_announce(&id, method)).await?))
}

#[derive(Debug, Serialize)]
struct MaskVersion {
    camera_id: String,
    version: u64,
}

async fn put_mask(
    State(st): State<Arc<AppState>>,
    Path(camera): Path<String>,
    Json(body): Json<ApiMask>,
) -> ApiResult<Json<MaskVersion>> {
    let version = st.store.upsert_mask(&camera, ParameterMask::from(&body))?;
    Ok(Json(MaskVersion { camera_id: camera, version }))
}

async fn get_mask(State(st): State<Arc<AppState>>, Path(camera): Path<String>) -> ApiResult<Json<ApiMask>> {
    Ok(Json(ApiMask::from(&st.store.mask(&camera)?)))
}

#[derive(Debug, Deserialize)]
struct RoiQuery {
    frame_id: String,
    geometry: RoiGeometry,
}

async fn post_roi_query(
    State(st): State<Arc<AppState>>,
    Json(q): Json<RoiQuery>,
) -> ApiResult<Json<crate::frame::RoiStats>> {
    let stats = blocking(move || {
        let frame = st.store.fetch(&q.frame_id)?;
        Ok(stats_for_api(frame.meta.kind, roi_stats(&frame, &q.geometry)?))
    })
    .await?;
    Ok(Json(stats))
}

#[derive(Debug, Deserialize)]
struct TimeseriesQuery {
    camera: String,
    /// RoiGeometry as JSON.
    geom: String,
    from: Option<i64>,
    to: Option<i64>,
}

async fn get_timeseries(
    State(st): State<Arc<AppState>>,
    Query(q): Query<TimeseriesQuery>,
) -> ApiResult<Json<Vec<TimeseriesPoint>>> {
    let geom: RoiGeometry = serde_json::from_str(&q.geom).map_err(Error::from)?;
    let series = blocking(move || st.store.roi_timeseries(&q.camera, &geom, q.from, q.to)).await?;
    Ok(Json(
        series
            .into_iter()
            .map(|mut p| {
                p.summary.mean -= CELSIUS_OFFSET;
                p.summary.min -= CELSIUS_OFFSET;
                p.summary.max -= CELSIUS_OFFSET;
                p
            })
            .collect(),
    ))
}

#[derive(Debug, Deserialize)]
struct StreamQuery {
    camera: Option<String>,
}

async fn get_stream(
    State(st): State<Arc<AppState>>,
    Query(q): Query<StreamQuery>,
) -> Sse<impl Stream<Item = std::result::Result<Event, Infallible>>> {
    let rx = st.events.subscribe();
    let stream = futures::stream::unfold((rx, q.camera), |(mut rx, camera)| async move {
        loop {
            match rx.recv().await {
                Ok(meta) if camera.as_deref().is_none_or(|c| c == meta.camera_id) => {
                    let ev = Event::default().event("frame").json_data(&meta).unwrap_or_default();
                    return Some((Ok(ev), (rx, camera)));
                }
                Ok(_) | Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}
