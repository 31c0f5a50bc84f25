//! Stateless HTTP preview service.
//!
//! `POST /v1/render` parses and renders one document per request and
//! `GET /v1/health` reports liveness. Every handler is a pure function of
//! the request and the read-only [`ServiceConfig`].

mod wire;

use std::net::SocketAddr;
use std::panic::{catch_unwind, AssertUnwindSafe};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use wire::{handle_render, Health, RenderRequest, RenderResponse, ServiceConfig, Want, WireDiagnostic};

pub const MAX_BODY_BYTES: usize = 1 << 20;
pub const DEFAULT_PORT: u16 = 8787;

/// Deeply nested input recurses deeply; render on a thread with room for it.
const RENDER_STACK_BYTES: usize = 16 << 20;

pub const JSON_CONTENT_TYPE: &str = "application/json; charset=utf-8";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server failed: {0}")]
    Serve(#[from] std::io::Error),
}

pub fn router(config: ServiceConfig) -> Router {
    Router::new()
        .route("/v1/render", post(render))
        .route("/v1/health", get(health))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .layer(cors())
        .with_state(config)
}

/// Serves on `addr` until interrupted with Ctrl-C.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind { addr, source })?;
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn json<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_string(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, JSON_CONTENT_TYPE)], text).into_response(),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            &format!("cannot encode response: {e}"),
        ),
    }
}

fn error(status: StatusCode, message: &str) -> Response {
    #[derive(Serialize)]
    struct ErrorBody<'a> {
        error: &'a str,
    }
    let text = serde_json::to_string(&ErrorBody { error: message }).unwrap_or_default();
    (status, [(header::CONTENT_TYPE, JSON_CONTENT_TYPE)], text).into_response()
}

async fn health() -> Response {
    json(StatusCode::OK, &Health::ok())
}

async fn render(
    State(config): State<ServiceConfig>,
    body: Result<Bytes, axum::extract::rejection::BytesRejection>,
) -> Response {
    let body = match body {
        Ok(b) => b,
        Err(rej) if rej.status() == StatusCode::PAYLOAD_TOO_LARGE => {
            return error(StatusCode::PAYLOAD_TOO_LARGE, "request body exceeds 1 MiB");
        }
        Err(rej) => return error(StatusCode::BAD_REQUEST, &rej.body_text()),
    };
    let req: RenderRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, &format!("malformed request: {e}")),
    };
    if req.want.is_empty() {
        return error(StatusCode::BAD_REQUEST, "malformed request: `want` is empty");
    }

    let (tx, rx) = tokio::sync::oneshot::channel();
    let spawned = std::thread::Builder::new()
        .name("render".into())
        .stack_size(RENDER_STACK_BYTES)
        .spawn(move || {
            let out = catch_unwind(AssertUnwindSafe(|| handle_render(&req, &config)));
            let _ = tx.send(out);
        });
    if spawned.is_err() {
        return error(StatusCode::INTERNAL_SERVER_ERROR, "cannot start render thread");
    }
    match rx.await {
        Ok(Ok(resp)) => json(StatusCode::OK, &resp),
        _ => error(StatusCode::INTERNAL_SERVER_ERROR, "internal error while rendering"),
    }
}

fn cors() -> CorsLayer {
    CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin: &HeaderValue, _| {
            origin.to_str().is_ok_and(is_loopback_origin)
        }))
        .allow_methods([axum::http::Method::GET, axum::http::Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

/// `http(s)://localhost`, `127.0.0.1` or `[::1]`, with an optional port.
pub fn is_loopback_origin(origin: &str) -> bool {
    let Some(rest) = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"))
    else {
        return false;
    };
    let host_end = if rest.starts_with('[') {
        rest.find(']').map_or(rest.len(), |i| i + 1)
    } else {
        rest.find(':').unwrap_or(rest.len())
    };
    let (host, port) = rest.split_at(host_end);
    let port_ok = port.is_empty()
        || port
            .strip_prefix(':')
            .is_some_and(|p| !p.is_empty() && p.len() <= 5 && p.bytes().all(|b| b.is_ascii_digit()));
    port_ok && matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}
