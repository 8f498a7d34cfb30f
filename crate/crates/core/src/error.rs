// SPDX-License-Identifier: Apache-2.0

use std::io;

use uuid::Uuid;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Timeouts, refused connections and 5xx responses. Retryable.
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    /// The backend answered, but the answer violates the wire contract.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("backend returned an empty response")]
    EmptyResponse,

    #[error("session has no analysis; capture first")]
    NoAnalysis,

    #[error("no object at ({u:.3}, {v:.3})")]
    NoObject { u: f64, v: f64 },

    #[error("unknown session {0}")]
    SessionNotFound(Uuid),

    #[error("image codec: {0}")]
    Image(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::BackendUnavailable(_))
    }
}
