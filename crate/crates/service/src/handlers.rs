//! Request handling, kept free of axum extractors so it can be tested
//! without a server.

use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use precise_core::attachment::WordAttachment;
use precise_core::matcher::{Diagnostics, Reason, Status};
use precise_core::tokenizer::normalize;
use precise_core::{translate, Error, TranslationOutcome};

use crate::feedback::FeedbackRecord;
use crate::AppState;

#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    Json(StatusCode, Value),
    Empty(StatusCode),
    Text(StatusCode, &'static str),
}

impl Reply {
    pub fn status(&self) -> StatusCode {
        match self {
            Reply::Json(s, _) | Reply::Empty(s) | Reply::Text(s, _) => *s,
        }
    }

    fn error(status: StatusCode, message: impl Into<String>) -> Self {
        Reply::Json(status, json!({ "error": message.into() }))
    }
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        match self {
            Reply::Json(status, body) => (status, axum::Json(body)).into_response(),
            Reply::Empty(status) => status.into_response(),
            Reply::Text(status, text) => (
                status,
                [(header::CONTENT_TYPE, "text/plain; charset=utf-8")],
                text,
            )
                .into_response(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct TranslateRequest {
    pub question: String,
    /// 1-based word position pairs.
    #[serde(default)]
    pub attachments: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Deserialize)]
pub struct FeedbackRequest {
    pub question: String,
    pub chosen_interpretation: usize,
    pub chosen_sql: usize,
    #[serde(default)]
    pub client: Option<String>,
    #[serde(default)]
    pub attachments: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Serialize)]
pub struct InterpretationView {
    pub paraphrase: String,
    pub focus: String,
    pub element_set: Vec<String>,
    pub sql: Vec<String>,
}

/// Translation result as returned over HTTP. Timing is left out so that
/// identical requests get identical bodies.
#[derive(Debug, Serialize)]
pub struct TranslateResponse {
    pub question: String,
    pub words: Vec<String>,
    pub status: Status,
    pub reason: Option<Reason>,
    pub distinct_element_sets: usize,
    pub interpretations: Vec<InterpretationView>,
    pub diagnostics: Diagnostics,
}

impl From<TranslationOutcome> for TranslateResponse {
    fn from(o: TranslationOutcome) -> Self {
        TranslateResponse {
            interpretations: o
                .interpretations
                .into_iter()
                .map(|i| InterpretationView {
                    paraphrase: i.paraphrase,
                    focus: i.focus,
                    element_set: i.element_set,
                    sql: i.sql.into_iter().map(|q| q.text).collect(),
                })
                .collect(),
            question: o.question,
            words: o.words,
            status: o.status,
            reason: o.reason,
            distinct_element_sets: o.distinct_element_sets,
            diagnostics: o.diagnostics,
        }
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, Reply> {
    serde_json::from_slice(body)
        .map_err(|e| Reply::error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn run(
    state: &AppState,
    question: &str,
    attachments: Option<&[[usize; 2]]>,
) -> Result<TranslationOutcome, Reply> {
    let q = normalize(question)
        .map_err(|e| Reply::error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    let aw = attachments
        .map(|pairs| WordAttachment::from_pairs(q.len(), pairs.iter().map(|&[i, j]| (i, j))))
        .transpose()
        .map_err(|e| Reply::error(StatusCode::BAD_REQUEST, e.to_string()))?;
    translate(question, &state.model, aw.as_ref(), state.options).map_err(|e| match e {
        Error::EmptyQuestion => Reply::error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        e => Reply::error(StatusCode::BAD_REQUEST, e.to_string()),
    })
}

pub fn handle_translate(state: &AppState, body: &[u8]) -> Reply {
    let req: TranslateRequest = match parse_body(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    match run(state, &req.question, req.attachments.as_deref()) {
        Ok(outcome) => {
            let response = TranslateResponse::from(outcome);
            Reply::Json(
                StatusCode::OK,
                serde_json::to_value(response).expect("response serializes"),
            )
        }
        Err(reply) => reply,
    }
}

/// Replays the question to check the chosen indices, then logs the choice.
pub fn handle_feedback(state: &AppState, body: &[u8]) -> Reply {
    let req: FeedbackRequest = match parse_body(body) {
        Ok(r) => r,
        Err(reply) => return reply,
    };
    let outcome = match run(state, &req.question, req.attachments.as_deref()) {
        Ok(o) => o,
        Err(reply) => return reply,
    };
    let Some(interp) = outcome.interpretations.get(req.chosen_interpretation) else {
        return Reply::error(
            StatusCode::CONFLICT,
            format!(
                "chosen_interpretation {} out of range ({} interpretations)",
                req.chosen_interpretation,
                outcome.interpretations.len()
            ),
        );
    };
    if req.chosen_sql >= interp.sql.len() {
        return Reply::error(
            StatusCode::CONFLICT,
            format!(
                "chosen_sql {} out of range ({} queries)",
                req.chosen_sql,
                interp.sql.len()
            ),
        );
    }
    let record = FeedbackRecord::new(
        chrono::Utc::now(),
        &req.question,
        req.chosen_interpretation,
        req.chosen_sql,
        req.client.as_deref().unwrap_or(""),
    );
    match state.feedback.append(&record) {
        Ok(()) => Reply::Empty(StatusCode::NO_CONTENT),
        Err(e) => {
            log::error!(
                "writing feedback to {}: {e}",
                state.feedback.path().display()
            );
            Reply::error(
                StatusCode::INTERNAL_SERVER_ERROR,
                "could not record feedback",
            )
        }
    }
}

pub fn handle_schema(state: &AppState) -> Reply {
    Reply::Json(StatusCode::OK, state.schema_json.clone())
}

pub fn handle_lexicon(state: &AppState) -> Reply {
    Reply::Json(StatusCode::OK, state.lexicon_json.clone())
}

pub fn handle_health() -> Reply {
    Reply::Text(StatusCode::OK, "ok")
}
