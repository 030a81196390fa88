use alias_core::game::GameError;
use alias_core::orchestrator::OrchestratorError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("missing or invalid facilitator token")]
    Unauthorized,
    #[error("no session '{0}'")]
    SessionNotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::SessionNotFound(_) => StatusCode::NOT_FOUND,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Orchestrator(OrchestratorError::Game(g)) => match g {
                GameError::WrongPhase { .. } | GameError::NotYourTurn { .. } | GameError::InvalidIntervention(_) => {
                    StatusCode::CONFLICT
                }
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ApiError::Orchestrator(OrchestratorError::ResourceMismatch { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Orchestrator(_) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (code, field) = match self {
            ApiError::Unauthorized => ("unauthorized", None),
            ApiError::SessionNotFound(_) => ("session_not_found", None),
            ApiError::BadRequest(_) => ("bad_request", None),
            ApiError::Orchestrator(OrchestratorError::Game(g)) => game_code(g),
            ApiError::Orchestrator(OrchestratorError::ResourceMismatch { .. }) => ("invalid_config", Some("target".into())),
            ApiError::Orchestrator(OrchestratorError::Morph(_)) => ("morphology", None),
            ApiError::Orchestrator(OrchestratorError::Clue(_)) => ("clue", None),
            ApiError::Internal(_) => ("internal", None),
        };
        ErrorBody { code, message: self.to_string(), field }
    }
}

fn game_code(g: &GameError) -> (&'static str, Option<String>) {
    match g {
        GameError::InvalidConfig(msg) => {
            let field = msg.split_whitespace().next().filter(|w| w.chars().all(|c| c.is_ascii_lowercase() || c == '_' || c == '.'));
            ("invalid_config", field.map(str::to_string))
        }
        GameError::EmptyWordList => ("invalid_config", Some("words".into())),
        GameError::LanguageMismatch { .. } | GameError::MalformedWord(_) => ("invalid_config", Some("words".into())),
        GameError::EmptyPseudonym | GameError::DuplicatePseudonym(_) => ("invalid_pseudonym", Some("pseudonym".into())),
        GameError::WrongPhase { .. } => ("wrong_phase", None),
        GameError::NoPlayers => ("no_players", None),
        GameError::UnknownPlayer(_) => ("unknown_player", Some("player_id".into())),
        GameError::NotYourTurn { .. } => ("not_your_turn", Some("player_id".into())),
        GameError::InvalidIntervention(_) => ("rejected", Some("kind".into())),
        GameError::ClueRejected(_) => ("clue_rejected", None),
        GameError::ClockRegression { .. } => ("clock_regression", None),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Envelope {
            error: ErrorBody,
        }
        (self.status(), Json(Envelope { error: self.body() })).into_response()
    }
}
