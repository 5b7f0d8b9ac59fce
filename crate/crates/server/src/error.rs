use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use roboviz_core::EngineError;
use serde_json::json;

/// Error body: `{"error": code, "message": text}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or invalid token")
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn conflict(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, code, message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
    }
}

impl From<EngineError> for ApiError {
    fn from(err: EngineError) -> Self {
        let message = err.to_string();
        match err {
            EngineError::UnknownRobot(_) => Self::not_found(message),
            EngineError::UnknownTeam(_) => Self::unauthorized(),
            EngineError::UnknownPart(_) | EngineError::InvalidGuess(_) | EngineError::DuplicateTeam(_) => {
                Self::invalid(message)
            }
            EngineError::LateBid { .. } => Self::conflict("late_bid", message),
            EngineError::NotPending(_) | EngineError::NotExpiring { .. } => {
                Self::conflict("not_pending", message)
            }
            EngineError::Finished => Self::conflict("finished", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.code, "message": self.message })),
        )
            .into_response()
    }
}
