//! HTTP front of the screening pipeline.
//!
//! | method | path             | result                                   |
//! |--------|------------------|------------------------------------------|
//! | POST   | `/api/v1/screen` | `ScreeningResponse` for a multipart `file` |
//! | GET    | `/api/v1/model`  | bundle metadata, 503 without a bundle    |
//! | GET    | `/api/v1/health` | `{"status":"ok"}`                        |
//!
//! Uploads are parsed in memory and dropped after the response. The bundle
//! is loaded once and shared read-only between requests.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use actiscreen::screening::{screen_upload, ModelInfo, ScreeningError, DEFAULT_WINDOW};
use actiscreen::ModelBundle;
use axum::extract::{DefaultBodyLimit, Multipart, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub bind: String,
    pub port: u16,
    pub max_upload_bytes: usize,
    /// Directory served at `/` when set.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            bind: "127.0.0.1".into(),
            port: 8080,
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    bundle: Option<Arc<ModelBundle>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

impl From<ScreeningError> for ApiError {
    fn from(e: ScreeningError) -> Self {
        let status = match e {
            ScreeningError::Malformed(_) | ScreeningError::BadWindow => StatusCode::BAD_REQUEST,
            ScreeningError::Empty | ScreeningError::NoValidDays => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

fn no_model() -> ApiError {
    ApiError(
        StatusCode::SERVICE_UNAVAILABLE,
        "no model bundle is loaded".into(),
    )
}

#[derive(Debug, Deserialize)]
struct ScreenQuery {
    window: Option<usize>,
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn model(State(state): State<AppState>) -> Result<Json<ModelInfo>, ApiError> {
    let bundle = state.bundle.as_deref().ok_or_else(no_model)?;
    Ok(Json(ModelInfo::from_bundle(bundle)))
}

async fn screen(
    State(state): State<AppState>,
    Query(q): Query<ScreenQuery>,
    mut multipart: Multipart,
) -> Result<Response, ApiError> {
    let bundle = state.bundle.clone().ok_or_else(no_model)?;
    let mut upload = None;
    loop {
        let field = multipart
            .next_field()
            .await
            .map_err(|e| ApiError(e.status(), e.body_text()))?;
        let Some(field) = field else { break };
        if field.name() == Some("file") {
            let bytes = field
                .bytes()
                .await
                .map_err(|e| ApiError(e.status(), e.body_text()))?;
            upload = Some(bytes);
        }
    }
    let bytes = upload.ok_or_else(|| {
        ApiError(
            StatusCode::BAD_REQUEST,
            "missing multipart field `file`".into(),
        )
    })?;
    let window = q.window.unwrap_or(DEFAULT_WINDOW);

    let result = tokio::task::spawn_blocking(move || screen_upload(&bundle, &bytes, window))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match result {
        Ok(resp) => Ok(Json(resp).into_response()),
        Err(e) => {
            tracing::debug!(error = %e, "screening rejected");
            Err(e.into())
        }
    }
}

pub fn router(bundle: Option<ModelBundle>, config: &ServeConfig) -> Router {
    let state = AppState {
        bundle: bundle.map(Arc::new),
    };
    let api = Router::new()
        .route("/api/v1/screen", post(screen))
        .route("/api/v1/model", get(model))
        .route("/api/v1/health", get(health))
        .layer(DefaultBodyLimit::max(config.max_upload_bytes))
        .with_state(state);
    match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until Ctrl-C.
pub async fn serve(bundle: Option<ModelBundle>, config: ServeConfig) -> std::io::Result<()> {
    let addr: SocketAddr = format!("{}:{}", config.bind, config.port)
        .parse()
        .map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("bad bind address: {e}"),
            )
        })?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, model_loaded = bundle.is_some(), "listening");
    axum::serve(listener, router(bundle, &config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
