//! Wire format: one JSON object per line, tagged with `"v"` (protocol
//! version) and `"type"` (message kind). See `docs/protocol.md`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::run::OutcomeKind;

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionMessage {
    Hello(Hello),
    StateUpdate(StateUpdate),
    Action(Action),
    Reset(Reset),
    End(End),
    Error(ErrorReply),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub agent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Limits>,
}

/// Game constants a client needs to render and act.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub evader_speed: f64,
    pub pursuer_speed: f64,
    pub capture_radius: f64,
    pub tick_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub t: usize,
    pub pursuers: Vec<[f64; 2]>,
    pub evader: [f64; 2],
    /// Bearings of the sector rays around the evader (tube team only).
    pub sector_rays: Vec<f64>,
    pub capture_radius: f64,
    pub encircled: bool,
    pub captured: bool,
    pub hull_signed_dist: f64,
    /// Pursuers spanning the watched hull, in polygon order.
    pub hull: Vec<usize>,
    pub min_pursuer_dist: f64,
    /// The clamped evader action that led to this state.
    pub last_action: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub ux: f64,
    pub uy: f64,
    /// Tick the action is meant for; actions tagged for another tick are
    /// dropped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

/// Restart with a bundled scenario (by name) or an inline scenario text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reset {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct End {
    pub outcome: OutcomeKind,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReply {
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("malformed message: {0}")]
    Syntax(String),
    #[error("message has no version tag")]
    MissingVersion,
    #[error("unsupported protocol version {0} (expected {PROTOCOL_VERSION})")]
    UnsupportedVersion(Value),
    #[error("invalid message: {0}")]
    Schema(String),
}

/// One line of UTF-8 JSON, without the trailing newline.
pub fn encode(msg: &SessionMessage) -> String {
    let mut v = serde_json::to_value(msg).expect("messages serialize");
    if let Value::Object(map) = &mut v {
        map.insert("v".into(), Value::from(PROTOCOL_VERSION));
    }
    v.to_string()
}

pub fn decode(line: &str) -> Result<SessionMessage, DecodeError> {
    let mut v: Value = serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| DecodeError::Syntax(e.to_string()))?;
    let Value::Object(map) = &mut v else {
        return Err(DecodeError::Schema("expected a JSON object".into()));
    };
    match map.remove("v") {
        None => return Err(DecodeError::MissingVersion),
        Some(ver) if ver.as_u64() == Some(PROTOCOL_VERSION) => {}
        Some(ver) => return Err(DecodeError::UnsupportedVersion(ver)),
    }
    serde_json::from_value(v).map_err(|e| DecodeError::Schema(e.to_string()))
}
