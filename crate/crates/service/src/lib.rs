//! HTTP facade over the translator: question translation, schema and
//! lexicon inspection, and a feedback log of interpretation choices.

pub mod feedback;
pub mod handlers;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::response::{Html, IntoResponse};
use axum::routing::{get, post};
use axum::Router;
use serde_json::Value;
use tower_http::services::ServeDir;

use precise_core::{Model, TranslateOptions};

pub use feedback::{FeedbackLog, FeedbackRecord};
pub use handlers::Reply;

/// Shared, read-only apart from the feedback log.
#[derive(Debug)]
pub struct AppState {
    pub model: Model,
    pub options: TranslateOptions,
    pub schema_json: Value,
    pub lexicon_json: Value,
    pub feedback: FeedbackLog,
}

impl AppState {
    pub fn load(
        schema_text: &str,
        lexicon_text: &str,
        feedback_log: &Path,
        options: TranslateOptions,
    ) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        Ok(AppState {
            model: Model::load(schema_text, lexicon_text)?,
            options,
            schema_json: serde_json::from_str(schema_text)?,
            lexicon_json: serde_json::from_str(lexicon_text)?,
            feedback: FeedbackLog::open(feedback_log)?,
        })
    }
}

const PLACEHOLDER: &str = "<!doctype html>\n<html><head><title>precise</title></head>\
<body><p>No UI assets are installed. The JSON API is under <code>/api</code>.</p></body></html>\n";

async fn translate_route(State(state): State<Arc<AppState>>, body: Bytes) -> Reply {
    tokio::task::spawn_blocking(move || handlers::handle_translate(&state, &body))
        .await
        .expect("translate task panicked")
}

async fn feedback_route(State(state): State<Arc<AppState>>, body: Bytes) -> Reply {
    tokio::task::spawn_blocking(move || handlers::handle_feedback(&state, &body))
        .await
        .expect("feedback task panicked")
}

/// Builds the router. Static assets come from `ui_dir` when given.
pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route(
            "/api/schema",
            get(|State(s): State<Arc<AppState>>| async move { handlers::handle_schema(&s) }),
        )
        .route(
            "/api/lexicon",
            get(|State(s): State<Arc<AppState>>| async move { handlers::handle_lexicon(&s) }),
        )
        .route("/api/health", get(|| async { handlers::handle_health() }))
        .route("/api/translate", post(translate_route))
        .route("/api/feedback", post(feedback_route))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER).into_response() })),
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve(
    state: Arc<AppState>,
    addr: SocketAddr,
    ui_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state, ui_dir)).await
}
