//! Session wire protocol.
//!
//! Every message is a JSON object `{type, seq, session_seconds, payload}`.
//! `seq` increases strictly per direction. Unknown `type` values are decode
//! errors, never ignored.

use serde::{Deserialize, Serialize};

use crate::egoview::{EgoViewState, Lowlight, ViewCondition};
use crate::graph::NodeId;
use crate::math::{Quat, Vec3};
use crate::navigation::Pose;
use crate::scene::SceneFile;
use crate::tasks::{TaskPrompt, TaskResult};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub seq: u64,
    pub session_seconds: f64,
    #[serde(flatten)]
    pub message: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ClientMessage {
    #[serde(rename = "hello")]
    Hello { client_version: String },
    /// Thumbstick axes in `[-1, 1]`. The optional head orientation lets
    /// the client steer; the server keeps the last one it received.
    #[serde(rename = "input.fly")]
    Fly {
        axis_x: f64,
        axis_y: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orientation: Option<Quat>,
    },
    #[serde(rename = "input.pointer")]
    Pointer { origin: Vec3, direction: Vec3 },
    #[serde(rename = "action.select")]
    Select { node: NodeId },
    #[serde(rename = "action.deselect")]
    Deselect { node: NodeId },
    #[serde(rename = "action.jump")]
    Jump { node: NodeId },
    #[serde(rename = "action.bookmark")]
    Bookmark { node: NodeId },
    #[serde(rename = "action.switch_view")]
    SwitchView {},
    #[serde(rename = "task.submit")]
    TaskSubmit { task_index: usize, response: TaskResponse },
    #[serde(rename = "questionnaire.submit")]
    Questionnaire(QuestionnaireResponse),
}

impl ClientMessage {
    pub fn type_name(&self) -> &'static str {
        match self {
            Self::Hello { .. } => "hello",
            Self::Fly { .. } => "input.fly",
            Self::Pointer { .. } => "input.pointer",
            Self::Select { .. } => "action.select",
            Self::Deselect { .. } => "action.deselect",
            Self::Jump { .. } => "action.jump",
            Self::Bookmark { .. } => "action.bookmark",
            Self::SwitchView {} => "action.switch_view",
            Self::TaskSubmit { .. } => "task.submit",
            Self::Questionnaire(_) => "questionnaire.submit",
        }
    }
}

/// Kind-specific answer to the active task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "response", rename_all = "snake_case")]
pub enum TaskResponse {
    /// FCN: the current selection is final.
    Done,
    /// END.
    Estimate { estimate: i64 },
    /// FiP: reported nodes from start to end.
    Path { path: Vec<NodeId> },
    /// Orientation tasks: pointing direction from the controller.
    Pointing { direction: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instrument {
    #[serde(rename = "SSQ")]
    Ssq,
    #[serde(rename = "TLX")]
    Tlx,
}

impl Instrument {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ssq => "SSQ",
            Self::Tlx => "TLX",
        }
    }

    pub fn item_count(self) -> usize {
        match self {
            Self::Ssq => 16,
            Self::Tlx => 6,
        }
    }

    pub fn max_value(self) -> u32 {
        match self {
            Self::Ssq => 3,
            Self::Tlx => 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub instrument: Instrument,
    pub items: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ViewCondition>,
}

impl QuestionnaireResponse {
    pub fn validate(&self) -> crate::Result<()> {
        let n = self.instrument.item_count();
        if self.items.len() != n {
            return Err(crate::Error::Input(format!(
                "{:?} expects {n} items, got {}",
                self.instrument,
                self.items.len()
            )));
        }
        let max = self.instrument.max_value();
        if let Some((i, v)) = self.items.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(crate::Error::Input(format!("item {i} = {v} exceeds {max}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    Overview,
    Detail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionMode {
    /// Navigation restricted per condition, tasks drive the session.
    Study,
    /// Every navigation technique is available; no tasks.
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneInit {
    pub condition: ViewCondition,
    pub mode: SessionMode,
    pub scene: SceneFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewStatePayload {
    pub perspective: Perspective,
    pub view: EgoViewState,
    /// Nodes the active task asks the user to see.
    pub task_highlight: Vec<NodeId>,
    pub selected: Vec<NodeId>,
    pub bookmarks: Vec<NodeId>,
    pub visited: Vec<NodeId>,
    pub hovered: Option<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowlight: Option<Lowlight>,
    /// Per-node RGB relative to the user node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic_colors: Option<Vec<[u8; 3]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePosition {
    pub node: NodeId,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ServerMessage {
    #[serde(rename = "scene.init")]
    SceneInit(Box<SceneInit>),
    #[serde(rename = "view.state")]
    ViewState(Box<ViewStatePayload>),
    /// Effective positions of the nodes that move, plus the user pose, at
    /// normalized animation time `t`.
    #[serde(rename = "anim.update")]
    AnimUpdate { positions: Vec<NodePosition>, pose: Pose, t: f64 },
    #[serde(rename = "task.prompt")]
    TaskPrompt(TaskPrompt),
    #[serde(rename = "task.complete")]
    TaskComplete { index: usize, result: TaskResult },
    #[serde(rename = "hud.info")]
    HudInfo { node: NodeId, label: String, degree: usize },
    #[serde(rename = "error")]
    Error { message: String, ref_seq: Option<u64> },
}

impl ServerMessage {
    pub fn type_name(&self) -> &'static str {
        match self {
            Self::SceneInit(_) => "scene.init",
            Self::ViewState(_) => "view.state",
            Self::AnimUpdate { .. } => "anim.update",
            Self::TaskPrompt(_) => "task.prompt",
            Self::TaskComplete { .. } => "task.complete",
            Self::HudInfo { .. } => "hud.info",
            Self::Error { .. } => "error",
        }
    }
}

/// A message that could not be decoded, with its `seq` when one was
/// readable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeError {
    pub message: String,
    pub ref_seq: Option<u64>,
}

impl std::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for DecodeError {}

pub fn decode<T: serde::de::DeserializeOwned>(text: &str) -> Result<Envelope<T>, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| DecodeError {
        message: format!("malformed JSON: {e}"),
        ref_seq: None,
    })?;
    let ref_seq = value.get("seq").and_then(serde_json::Value::as_u64);
    if ref_seq.is_none() {
        return Err(DecodeError {
            message: "missing or invalid seq".into(),
            ref_seq: None,
        });
    }
    serde_json::from_value(value).map_err(|e| DecodeError {
        message: e.to_string(),
        ref_seq,
    })
}

pub fn decode_client(text: &str) -> Result<Envelope<ClientMessage>, DecodeError> {
    decode(text)
}

pub fn decode_server(text: &str) -> Result<Envelope<ServerMessage>, DecodeError> {
    decode(text)
}

pub fn encode<T: Serialize>(envelope: &Envelope<T>) -> String {
    serde_json::to_string(envelope).expect("protocol messages always serialize")
}
