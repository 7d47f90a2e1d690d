use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde_json::json;

use super::{ErrorKind, ToolError, ToolService};

impl IntoResponse for ToolError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.kind.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = json!({"error": {"code": self.kind.code(), "message": self.message}});
        (status, Json(body)).into_response()
    }
}

/// Parses a JSON body so that malformed requests get the uniform error envelope.
fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ToolError> {
    serde_json::from_slice(body).map_err(|e| ToolError::new(ErrorKind::InvalidRequest, format!("bad request body: {e}")))
}

/// Runs blocking service work off the async executor.
async fn blocking<T: Send + 'static>(
    svc: Arc<ToolService>,
    f: impl FnOnce(&ToolService) -> Result<T, ToolError> + Send + 'static,
) -> Result<T, ToolError> {
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ToolError::new(ErrorKind::Internal, e.to_string()))?
}

async fn search(State(svc): State<Arc<ToolService>>, body: Bytes) -> Result<Response, ToolError> {
    let req = parse(&body)?;
    Ok(Json(blocking(svc, move |s| s.search(&req)).await?).into_response())
}

async fn browse(State(svc): State<Arc<ToolService>>, body: Bytes) -> Result<Response, ToolError> {
    let req = parse(&body)?;
    Ok(Json(blocking(svc, move |s| s.browse(&req)).await?).into_response())
}

async fn create_session(State(svc): State<Arc<ToolService>>) -> Response {
    Json(svc.create_session()).into_response()
}

async fn get_session(State(svc): State<Arc<ToolService>>, Path(id): Path<String>) -> Result<Response, ToolError> {
    Ok(Json(svc.session(&id)?).into_response())
}

async fn transfer_brief(State(svc): State<Arc<ToolService>>, body: Bytes) -> Result<Response, ToolError> {
    let req = parse(&body)?;
    Ok(Json(blocking(svc, move |s| s.transfer_brief(&req)).await?).into_response())
}

async fn health(State(svc): State<Arc<ToolService>>) -> Response {
    let h = svc.health();
    let status = if h.status == "ok" {
        StatusCode::OK
    } else {
        StatusCode::SERVICE_UNAVAILABLE
    };
    (status, Json(h)).into_response()
}

async fn fallback() -> ToolError {
    ToolError::new(ErrorKind::NotFound, "no such endpoint")
}

pub fn router(service: Arc<ToolService>) -> Router {
    Router::new()
        .route("/v1/search", post(search))
        .route("/v1/browse", post(browse))
        .route("/v1/session", post(create_session))
        .route("/v1/session/{id}", get(get_session))
        .route("/v1/transfer_brief", post(transfer_brief))
        .route("/v1/health", get(health))
        .fallback(fallback)
        .with_state(service)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<ToolService>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}
