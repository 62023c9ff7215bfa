//! JSON HTTP API over a loaded [`Engine`].
//!
//! | method | path              | body / answer                                   |
//! |--------|-------------------|-------------------------------------------------|
//! | POST   | `/curate`         | `{title, description, variant, k?}` → ranking   |
//! | GET    | `/artworks/{id}`  | one catalog record                              |
//! | GET    | `/models`         | availability and checkpoint metadata per variant|
//! | GET    | `/health`         | `{"status": "ok", ...}`                         |

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use exhibit_core::corpus::ArtworkRecord;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::engine::{Curator, Engine};
use crate::Error;

pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        use exhibit_core::Error as Core;
        let status = match &e {
            Error::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            Error::Core(Core::InvalidArgument(_) | Core::Empty(_) | Core::DimensionMismatch { .. }) => StatusCode::BAD_REQUEST,
            Error::Core(Core::Provider { .. } | Core::Exhausted { .. }) | Error::Transport(_) => StatusCode::BAD_GATEWAY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

pub fn artwork_json(a: &ArtworkRecord) -> Value {
    json!({
        "object_id": a.object_id,
        "department": a.department,
        "artist_display_name": a.artist_display_name,
        "object_begin_date": a.object_begin_date,
        "medium": a.medium,
        "classification": a.classification,
        "tags": a.tags,
        "title": a.title,
        "object_name": a.object_name,
        "public_image_url": a.public_image_url,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurateRequest {
    #[serde(default)]
    title: String,
    #[serde(default)]
    description: String,
    variant: String,
    k: Option<usize>,
}

async fn curate(State(engine): State<Arc<Engine>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let req: CurateRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))?;
    let curator =
        Curator::parse(&req.variant).ok_or_else(|| ApiError::bad_request(format!("unknown variant {:?}", req.variant)))?;
    if req.title.trim().is_empty() && req.description.trim().is_empty() {
        return Err(ApiError::bad_request("title and description are both empty"));
    }
    let k = req.k.unwrap_or(engine.default_k);
    if k == 0 {
        return Err(ApiError::bad_request("k must be at least 1"));
    }
    let started = Instant::now();
    let worker = engine.clone();
    let ranked = tokio::task::spawn_blocking(move || worker.curate(curator, &req.title, &req.description, Some(k)))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let artworks: Vec<Value> = ranked
        .iter()
        .enumerate()
        .filter_map(|(rank, s)| {
            let mut v = artwork_json(engine.catalog().get(s.object_id)?);
            v["rank"] = json!(rank + 1);
            v["score"] = json!(s.score);
            Some(v)
        })
        .collect();
    Ok(Json(json!({
        "variant": curator.tag(),
        "k": k,
        "elapsed_ms": started.elapsed().as_secs_f64() * 1e3,
        "artworks": artworks,
    })))
}

async fn artwork(State(engine): State<Arc<Engine>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let id: u64 = id.trim().parse().map_err(|_| ApiError::bad_request(format!("object id {id:?} is not a number")))?;
    engine
        .catalog()
        .get(id)
        .map(|a| Json(artwork_json(a)))
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no artwork {id}")))
}

async fn models(State(engine): State<Arc<Engine>>) -> Json<Value> {
    Json(json!({
        "variants": engine.status(),
        "default_k": engine.default_k,
        "nprobe": engine.nprobe,
        "catalog_size": engine.catalog().len(),
        "tag_vocabulary_size": engine.tag_vocabulary().len(),
    }))
}

async fn health(State(engine): State<Arc<Engine>>) -> Json<Value> {
    Json(json!({ "status": "ok", "catalog_size": engine.catalog().len() }))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/curate", post(curate))
        .route("/artworks/{id}", get(artwork))
        .route("/models", get(models))
        .route("/health", get(health))
        .with_state(engine)
}

/// Serves until Ctrl-C.
pub async fn serve(engine: Arc<Engine>, bind: &str) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
