//! The HTTP link service: `POST /link` takes a link request and returns the
//! same machine-readable document as `paperlink link --format machine`.

use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use paperlink::{LinkError, LinkRequest};
use serde_json::json;

use crate::Engine;

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/link", post(link))
        .route("/health", get(|| async { "ok\n" }))
        .with_state(engine)
}

async fn link(State(engine): State<Arc<Engine>>, body: String) -> Response {
    let result = LinkRequest::from_json(&body).and_then(|req| engine.answer(req));
    match result {
        Ok(resp) => (StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], resp.to_machine()).into_response(),
        Err(err) => error_response(&err),
    }
}

fn error_response(err: &LinkError) -> Response {
    let (status, field) = match err {
        LinkError::InvalidRequest { field, .. } => (StatusCode::BAD_REQUEST, Some(field.as_str())),
        LinkError::NoMetadata => (StatusCode::UNPROCESSABLE_ENTITY, None),
        e if e.is_input_error() => (StatusCode::BAD_REQUEST, None),
        _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
    };
    if status.is_server_error() {
        log::error!("link request failed: {err}");
    }
    let body = json!({ "error": err.to_string(), "field": field });
    let mut text = serde_json::to_string_pretty(&body).expect("error bodies always serialize");
    text.push('\n');
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}
