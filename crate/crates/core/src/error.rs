use thiserror::Error;

use crate::rational::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-canonical rational {text:?}: {reason}")]
    NonCanonical { text: String, reason: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("graph is disconnected: vertex {unreachable} cannot be reached from vertex 0")]
    Disconnected { unreachable: usize },

    #[error("type violates the triangle conditions at points ({x}, {y}): {detail}")]
    InvalidType { x: usize, y: usize, detail: String },

    #[error("precondition failed: distortion {distortion} is not below {bound}")]
    DistortionTooLarge { distortion: String, bound: Rat },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    Budget { what: &'static str, needed: String, budget: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
