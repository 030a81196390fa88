//! HTTP API and event stream.
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/health` | |
//! | GET | `/sessions` | |
//! | POST | `/sessions` | `{config, words?}` |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/players` | `{pseudonym}` |
//! | POST | `/sessions/{id}/start` | |
//! | POST | `/sessions/{id}/utterances` | `{player_id, transcript}` |
//! | POST | `/sessions/{id}/interventions` | `{kind}` |
//! | GET | `/sessions/{id}/report` | |
//! | GET | `/sessions/{id}/log` | |
//! | GET | `/sessions/{id}/events` | server-sent events |
//!
//! Every route except `/health` needs the facilitator token, as
//! `Authorization: Bearer <token>` or `?token=<token>` (browsers cannot set
//! headers on an event source). Errors are `{"error": {code, message, field?}}`.
//!
//! The event stream sends one event per message with the event's `seq` as
//! its id and its kind as the event name. It starts at `?from_seq=N`, or
//! after the `Last-Event-ID` header, or at 0, and closes after
//! `session_ended`.

use std::convert::Infallible;
use std::sync::Arc;

use alias_core::game::InterventionKind;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Deserialize;
use serde_json::json;

use crate::error::ApiError;
use crate::hub::{CommandReply, CreateSession, EventLog, Hub, SessionView};

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    pub token: Arc<str>,
}

pub fn router(state: AppState) -> Router {
    let guarded = Router::new()
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}", get(session_state))
        .route("/sessions/{id}/players", post(add_player))
        .route("/sessions/{id}/start", post(start))
        .route("/sessions/{id}/utterances", post(utterance))
        .route("/sessions/{id}/interventions", post(intervene))
        .route("/sessions/{id}/report", get(report))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/events", get(events))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new().route("/health", get(|| async { Json(json!({"status": "ok"})) })).merge(guarded).with_state(state)
}

#[derive(Deserialize)]
struct TokenQuery {
    token: Option<String>,
}

async fn require_token(
    State(state): State<AppState>,
    Query(q): Query<TokenQuery>,
    headers: HeaderMap,
    request: Request,
    next: Next,
) -> Response {
    let bearer = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    let presented = bearer.or(q.token.as_deref());
    if presented.is_some_and(|t| t == &*state.token) {
        next.run(request).await
    } else {
        ApiError::Unauthorized.into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::BadRequest(e.body_text()))
}

async fn list_sessions(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "sessions": state.hub.ids() }))
}

async fn create_session(
    State(state): State<AppState>,
    payload: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req = body(payload)?;
    let (_, view) = state.hub.create(req)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn session_state(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(state.hub.get(&id)?.view().await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddPlayer {
    pseudonym: String,
}

async fn add_player(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<AddPlayer>, JsonRejection>,
) -> Result<(StatusCode, Json<CommandReply>), ApiError> {
    let session = state.hub.get(&id)?;
    let req = body(payload)?;
    Ok((StatusCode::CREATED, Json(session.add_player(req.pseudonym).await?)))
}

async fn start(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<CommandReply>, ApiError> {
    Ok(Json(state.hub.get(&id)?.start().await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Utterance {
    player_id: String,
    transcript: String,
}

async fn utterance(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Utterance>, JsonRejection>,
) -> Result<Json<CommandReply>, ApiError> {
    let session = state.hub.get(&id)?;
    let req = body(payload)?;
    Ok(Json(session.utterance(req.player_id, req.transcript).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Intervene {
    kind: InterventionKind,
}

async fn intervene(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<Intervene>, JsonRejection>,
) -> Result<Json<CommandReply>, ApiError> {
    let session = state.hub.get(&id)?;
    let req = body(payload)?;
    Ok(Json(session.intervene(req.kind).await?))
}

async fn report(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(state.hub.get(&id)?.report().await?).into_response())
}

async fn log(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let text = alias_core::replay::write_log(&state.hub.get(&id)?.log().snapshot());
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

#[derive(Deserialize)]
struct StreamQuery {
    from_seq: Option<u64>,
}

async fn events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<StreamQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let session = state.hub.get(&id)?;
    let resume = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(|seq| seq + 1);
    let from = q.from_seq.or(resume).unwrap_or(0);
    Ok(Sse::new(event_stream(session.log().clone(), from as usize)).keep_alive(KeepAlive::default()))
}

fn event_stream(log: Arc<EventLog>, from: usize) -> impl Stream<Item = Result<Event, Infallible>> {
    let rx = log.subscribe();
    stream::unfold((log, rx, from), |(log, mut rx, next)| async move {
        loop {
            if let Some(e) = log.get(next) {
                let event = Event::default()
                    .id(e.seq.to_string())
                    .event(e.kind())
                    .json_data(&e)
                    .expect("events serialize");
                return Some((Ok(event), (log, rx, next + 1)));
            }
            if log.is_closed() || rx.changed().await.is_err() {
                return None;
            }
        }
    })
}
