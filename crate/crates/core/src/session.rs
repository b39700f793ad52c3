//! Authoritative session state machine.
//!
//! Time advances in whole ticks at [`TICK_HZ`]; client messages are applied
//! between ticks. Everything observable (outgoing messages, task results,
//! the final snapshot) is a pure function of the scene, the configuration
//! and the sequence of `(tick, seq, message)` inputs, which is what makes
//! logs replayable.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::egoview::{apply_condition, geodesic_colors, lowlight_set, EgoViewState, ViewCondition};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::math::Vec3;
use crate::navigation::{blend, ease, fly_step, pick_node, NavParams, Pose, Ray, JUMP_SECONDS, TELEPORT_SECONDS};
use crate::protocol::{
    ClientMessage, Envelope, NodePosition, Perspective, QuestionnaireResponse, SceneInit, ServerMessage, SessionMode,
    TaskResponse, ViewStatePayload,
};
use crate::scene::Scene;
use crate::tasks::{
    score_end, score_fcn, score_fip, score_so, FopEvent, FopProgress, TaskKind, TaskResult, TaskSet, TaskSpec,
};

pub const TICK_HZ: u64 = 60;

pub fn ticks_to_seconds(ticks: u64) -> f64 {
    ticks as f64 / TICK_HZ as f64
}

pub fn seconds_to_ticks(seconds: f64) -> u64 {
    (seconds * TICK_HZ as f64).round().max(0.0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub condition: ViewCondition,
    pub mode: SessionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStart {
    pub config: SessionConfig,
    pub tasks: Option<TaskSet>,
    pub node_count: usize,
    pub edge_count: usize,
}

/// Everything the session records, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum SessionEvent {
    #[serde(rename = "session.start")]
    Start(SessionStart),
    #[serde(rename = "input")]
    Input { seq: u64, message: ClientMessage },
    /// A frame that never decoded into a message.
    #[serde(rename = "input.rejected")]
    Rejected { ref_seq: Option<u64>, error: String },
    #[serde(rename = "task.start")]
    TaskStart { index: usize, spec: TaskSpec },
    #[serde(rename = "task.end")]
    TaskEnd { index: usize, result: TaskResult },
    #[serde(rename = "questionnaire")]
    Questionnaire(QuestionnaireResponse),
    #[serde(rename = "session.end")]
    End(Box<SessionSnapshot>),
}

impl SessionEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Start(_) => "session.start",
            Self::Input { .. } => "input",
            Self::Rejected { .. } => "input.rejected",
            Self::TaskStart { .. } => "task.start",
            Self::TaskEnd { .. } => "task.end",
            Self::Questionnaire(_) => "questionnaire",
            Self::End(_) => "session.end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub tick: u64,
    pub event: SessionEvent,
}

/// Observable session state, compared after replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub tick: u64,
    pub started: bool,
    pub pose: Pose,
    pub perspective: Perspective,
    pub user_node: Option<NodeId>,
    pub view: EgoViewState,
    pub selected: Vec<NodeId>,
    pub bookmarks: Vec<NodeId>,
    pub visited: Vec<NodeId>,
    pub hovered: Option<NodeId>,
    pub active_task: Option<usize>,
    pub results: Vec<TaskResult>,
}

#[derive(Debug, Clone)]
struct Motion {
    from: Vec3,
    to: Vec3,
    start: u64,
    end: u64,
    from_view: EgoViewState,
    to_view: EgoViewState,
    moving: Vec<NodeId>,
    user_after: Option<NodeId>,
    perspective_after: Perspective,
}

impl Motion {
    fn progress(&self, tick: u64) -> f64 {
        if self.end <= self.start {
            return 1.0;
        }
        ((tick.saturating_sub(self.start)) as f64 / (self.end - self.start) as f64).min(1.0)
    }
}

#[derive(Debug, Clone)]
enum Phase {
    Ready,
    /// Waiting for the start-node click at the overview.
    AwaitStart,
    Follow {
        progress: FopProgress,
        started_at: Option<u64>,
        travel_to: Option<NodeId>,
    },
}

#[derive(Debug, Clone)]
struct ActiveTask {
    index: usize,
    spec: TaskSpec,
    start_tick: u64,
    phase: Phase,
}

pub struct Session {
    scene: Arc<Scene>,
    config: SessionConfig,
    tasks: Option<TaskSet>,
    nav: NavParams,
    tick: u64,
    started: bool,
    last_seq: Option<u64>,
    out_seq: u64,
    outbox: Vec<Envelope<ServerMessage>>,
    records: Vec<SessionRecord>,
    pose: Pose,
    perspective: Perspective,
    user_node: Option<NodeId>,
    view: EgoViewState,
    fly_axes: (f64, f64),
    motion: Option<Motion>,
    selected: BTreeSet<NodeId>,
    bookmarks: BTreeSet<NodeId>,
    visited: BTreeSet<NodeId>,
    hovered: Option<NodeId>,
    task: Option<ActiveTask>,
    results: Vec<TaskResult>,
    ended: bool,
}

impl Session {
    pub fn new(scene: Arc<Scene>, config: SessionConfig, tasks: Option<TaskSet>) -> Result<Self> {
        if config.mode == SessionMode::Free && tasks.is_some() {
            return Err(Error::Parameter("free exploration sessions take no tasks".into()));
        }
        if let Some(set) = &tasks {
            for spec in &set.tasks {
                spec.validate(&scene.graph, &relaxed_bounds())?;
            }
        }
        let nav = NavParams::new(scene.calibration.max_fly_speed)?;
        let start = SessionStart {
            config,
            tasks: tasks.clone(),
            node_count: scene.graph.node_count(),
            edge_count: scene.graph.edge_count(),
        };
        Ok(Self {
            pose: scene.overview,
            scene,
            config,
            tasks,
            nav,
            tick: 0,
            started: false,
            last_seq: None,
            out_seq: 0,
            outbox: Vec::new(),
            records: vec![SessionRecord { tick: 0, event: SessionEvent::Start(start) }],
            perspective: Perspective::Overview,
            user_node: None,
            view: EgoViewState::plain(config.condition),
            fly_axes: (0.0, 0.0),
            motion: None,
            selected: BTreeSet::new(),
            bookmarks: BTreeSet::new(),
            visited: BTreeSet::new(),
            hovered: None,
            task: None,
            results: Vec::new(),
            ended: false,
        })
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn session_seconds(&self) -> f64 {
        ticks_to_seconds(self.tick)
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn user_node(&self) -> Option<NodeId> {
        self.user_node
    }

    pub fn perspective(&self) -> Perspective {
        self.perspective
    }

    pub fn view(&self) -> &EgoViewState {
        &self.view
    }

    pub fn results(&self) -> &[TaskResult] {
        &self.results
    }

    pub fn is_started(&self) -> bool {
        self.started
    }

    /// Index and spec of the active task.
    pub fn active_task(&self) -> Option<(usize, &TaskSpec)> {
        self.task.as_ref().map(|t| (t.index, &t.spec))
    }

    /// True once every task has been completed (study sessions with tasks).
    pub fn tasks_finished(&self) -> bool {
        self.started && self.task.is_none() && self.tasks.as_ref().is_some_and(|t| self.results.len() == t.tasks.len())
    }

    /// Tick at which the running jump or view transition ends.
    pub fn motion_end(&self) -> Option<u64> {
        self.motion.as_ref().map(|m| m.end)
    }

    /// Node highlighted by an active follow-path task.
    pub fn follow_highlight(&self) -> Option<NodeId> {
        match &self.task.as_ref()?.phase {
            Phase::Follow { progress, .. } => progress.highlighted_node(),
            _ => None,
        }
    }

    /// Node a flying user still has to reach in an active follow-path task.
    pub fn follow_travel_target(&self) -> Option<NodeId> {
        match &self.task.as_ref()?.phase {
            Phase::Follow { travel_to, .. } => *travel_to,
            _ => None,
        }
    }

    pub fn effective_positions(&self) -> Vec<Vec3> {
        match &self.motion {
            Some(m) => {
                let mut out = m.from_view.effective_positions(&self.scene.positions);
                let s = ease(m.progress(self.tick));
                for &v in &m.moving {
                    out[v] = blend(
                        &m.from_view.position_of(v, &self.scene.positions),
                        &m.to_view.position_of(v, &self.scene.positions),
                        s,
                    );
                }
                out
            }
            None => self.view.effective_positions(&self.scene.positions),
        }
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            tick: self.tick,
            started: self.started,
            pose: self.pose,
            perspective: self.perspective,
            user_node: self.user_node,
            view: self.view.clone(),
            selected: self.selected.iter().copied().collect(),
            bookmarks: self.bookmarks.iter().copied().collect(),
            visited: self.visited.iter().copied().collect(),
            hovered: self.hovered,
            active_task: self.task.as_ref().map(|t| t.index),
            results: self.results.clone(),
        }
    }

    pub fn drain_outbox(&mut self) -> Vec<Envelope<ServerMessage>> {
        std::mem::take(&mut self.outbox)
    }

    pub fn drain_records(&mut self) -> Vec<SessionRecord> {
        std::mem::take(&mut self.records)
    }

    /// Records the final snapshot. Later inputs are still processed but the
    /// session is considered closed for logging purposes.
    pub fn finish(&mut self) -> SessionSnapshot {
        let snap = self.snapshot();
        if !self.ended {
            self.ended = true;
            self.record(SessionEvent::End(Box::new(snap.clone())));
        }
        snap
    }

    pub fn advance_ticks(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn advance_to(&mut self, tick: u64) {
        while self.tick < tick {
            self.step();
        }
    }

    /// Reports a frame that failed to decode.
    pub fn reject(&mut self, ref_seq: Option<u64>, error: String) {
        self.record(SessionEvent::Rejected { ref_seq, error: error.clone() });
        self.send(ServerMessage::Error { message: error, ref_seq });
    }

    pub fn handle(&mut self, seq: u64, message: ClientMessage) {
        self.record(SessionEvent::Input { seq, message: message.clone() });
        if self.last_seq.is_some_and(|last| seq <= last) {
            let last = self.last_seq.unwrap_or_default();
            self.send_error(format!("seq {seq} does not follow {last}"), seq);
            return;
        }
        self.last_seq = Some(seq);
        if !self.started && !matches!(message, ClientMessage::Hello { .. }) {
            self.send_error("session not started: send hello first".into(), seq);
            return;
        }
        if let Err(e) = self.dispatch(message) {
            self.send_error(e.to_string(), seq);
        }
    }

    fn record(&mut self, event: SessionEvent) {
        self.records.push(SessionRecord { tick: self.tick, event });
    }

    fn send(&mut self, message: ServerMessage) {
        self.out_seq += 1;
        self.outbox.push(Envelope {
            seq: self.out_seq,
            session_seconds: self.session_seconds(),
            message,
        });
    }

    fn send_error(&mut self, message: String, seq: u64) {
        self.send(ServerMessage::Error { message, ref_seq: Some(seq) });
    }

    fn check_node(&self, node: NodeId) -> Result<()> {
        if self.scene.graph.contains(node) {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    fn study(&self) -> bool {
        self.config.mode == SessionMode::Study
    }

    fn dispatch(&mut self, message: ClientMessage) -> Result<()> {
        match message {
            ClientMessage::Hello { .. } => {
                if self.started {
                    return Err(Error::Protocol("session already started".into()));
                }
                self.started = true;
                self.send(ServerMessage::SceneInit(Box::new(SceneInit {
                    condition: self.config.condition,
                    mode: self.config.mode,
                    scene: self.scene.to_file(),
                })));
                if self.tasks.as_ref().is_some_and(|t| !t.tasks.is_empty()) {
                    self.start_task(0)?;
                } else {
                    self.send_view_state();
                }
            }
            ClientMessage::Fly { axis_x, axis_y, orientation } => {
                if self.study() && self.config.condition.is_egocentric() {
                    return Err(Error::Protocol("flying is not available in this condition".into()));
                }
                if self.study() && self.perspective == Perspective::Overview {
                    return Err(Error::Protocol("flying needs the detail perspective".into()));
                }
                if !(axis_x.is_finite() && axis_y.is_finite()) {
                    return Err(Error::Input("fly axes must be finite".into()));
                }
                self.fly_axes = (axis_x.clamp(-1.0, 1.0), axis_y.clamp(-1.0, 1.0));
                if let Some(q) = orientation {
                    self.pose.orientation = q;
                }
            }
            ClientMessage::Pointer { origin, direction } => {
                let ray = Ray::new(origin, direction)?;
                self.pose.controller_ray = ray;
                let hovered = pick_node(&ray, &self.effective_positions(), self.scene.calibration.node_radius);
                if hovered != self.hovered {
                    self.hovered = hovered;
                    self.send_view_state();
                }
            }
            ClientMessage::Select { node } => {
                self.check_node(node)?;
                self.select(node)?;
            }
            ClientMessage::Deselect { node } => {
                self.check_node(node)?;
                if self.selected.remove(&node) {
                    self.send_view_state();
                }
            }
            ClientMessage::Jump { node } => {
                self.check_node(node)?;
                if self.study() && !self.config.condition.is_egocentric() {
                    return Err(Error::Protocol("jumping is not available in baseline".into()));
                }
                if self.study() && self.perspective == Perspective::Overview && self.motion.is_none() {
                    return Err(Error::Protocol("jumping needs the detail perspective".into()));
                }
                if self.follow_highlight() == Some(node) {
                    self.select(node)?;
                } else {
                    self.begin_jump(node)?;
                }
            }
            ClientMessage::Bookmark { node } => {
                self.check_node(node)?;
                if !self.bookmarks.remove(&node) {
                    self.bookmarks.insert(node);
                }
                self.send_view_state();
            }
            ClientMessage::SwitchView {} => {
                if self.study() {
                    return Err(Error::Protocol("view switching is disabled during the study".into()));
                }
                self.switch_view()?;
            }
            ClientMessage::TaskSubmit { task_index, response } => self.submit(task_index, response)?,
            ClientMessage::Questionnaire(q) => {
                q.validate()?;
                self.record(SessionEvent::Questionnaire(q));
            }
        }
        Ok(())
    }

    fn select(&mut self, node: NodeId) -> Result<()> {
        enum Act {
            Plain,
            Found(f64),
            BeginAtStart(NodeId),
            Nothing,
            Refresh,
            Jump(NodeId),
            Travel,
        }
        let now = self.tick;
        let ego = self.config.condition.is_egocentric();
        let act = match self.task.as_mut() {
            None => Act::Plain,
            Some(task) => match (&task.spec, &mut task.phase) {
                (TaskSpec::FindNeighbor { target, .. }, _) if node == *target => {
                    Act::Found(ticks_to_seconds(now - task.start_tick))
                }
                (TaskSpec::OrientOverviewDetail { start, .. }, phase @ Phase::AwaitStart) => {
                    if node == *start {
                        *phase = Phase::Ready;
                        Act::BeginAtStart(node)
                    } else {
                        Act::Nothing
                    }
                }
                (TaskSpec::FollowPath { .. }, Phase::Follow { progress, started_at, travel_to }) => {
                    match progress.click(node) {
                        FopEvent::Ignored => Act::Nothing,
                        FopEvent::Started => {
                            *started_at = Some(now);
                            Act::Refresh
                        }
                        FopEvent::Advanced { travel_to: next } if ego => {
                            *travel_to = None;
                            Act::Jump(next)
                        }
                        FopEvent::Advanced { travel_to: next } => {
                            *travel_to = Some(next);
                            Act::Travel
                        }
                    }
                }
                _ => Act::Plain,
            },
        };
        match act {
            Act::Plain => {
                self.selected.insert(node);
                self.send_view_state();
            }
            Act::Found(elapsed) => {
                self.selected.insert(node);
                self.complete_task(TaskResult::new(TaskKind::FindNeighbor, elapsed))?;
            }
            Act::BeginAtStart(v) => self.place_at(v)?,
            Act::Nothing => {}
            Act::Refresh => self.send_view_state(),
            Act::Jump(v) => {
                self.send_view_state();
                self.begin_jump(v)?;
            }
            Act::Travel => {
                self.send_view_state();
                self.check_arrival()?;
            }
        }
        Ok(())
    }

    fn submit(&mut self, index: usize, response: TaskResponse) -> Result<()> {
        let Some(task) = self.task.as_ref() else {
            return Err(Error::Protocol(format!("task {index} is not active")));
        };
        if task.index != index {
            return Err(Error::Protocol(format!("task {index} is not active (active: {})", task.index)));
        }
        let kind = task.spec.kind();
        let elapsed = ticks_to_seconds(self.tick - task.start_tick);
        let result = match (&task.spec, response) {
            (TaskSpec::CommonNeighbors { truth, .. }, TaskResponse::Done) => {
                let truth: BTreeSet<NodeId> = truth.iter().copied().collect();
                let score = score_fcn(&self.selected, &truth)?;
                TaskResult::new(kind, elapsed).with_fcn(&self.selected, score)
            }
            (TaskSpec::EstimateDegree { truth_degree, .. }, TaskResponse::Estimate { estimate }) => {
                TaskResult::new(kind, elapsed).with_end(estimate, score_end(estimate, *truth_degree)?)
            }
            (TaskSpec::FindPath { truth_path, .. }, TaskResponse::Path { path }) => {
                let score = score_fip(&path, &self.scene.graph, truth_path);
                TaskResult::new(kind, elapsed).with_fip(path, score)
            }
            (spec, TaskResponse::Pointing { direction }) if kind.is_orientation() => {
                if matches!(task.phase, Phase::AwaitStart) {
                    return Err(Error::Protocol("select the start node to begin the task".into()));
                }
                if self.motion.is_some() {
                    return Err(Error::Protocol("wait for the transition to finish".into()));
                }
                let target = spec.orientation_target().expect("orientation task has a target");
                let ray = Ray::new(self.pose.position, direction)?;
                let angle = score_so(&ray, &self.scene.positions[target])?;
                TaskResult::new(kind, elapsed).with_orientation(ray, angle)
            }
            (TaskSpec::FindNeighbor { .. } | TaskSpec::FollowPath { .. }, _) => {
                return Err(Error::Protocol(format!("{kind} completes automatically")));
            }
            (_, other) => {
                return Err(Error::Input(format!("{kind} does not accept a {other:?} response")));
            }
        };
        self.complete_task(result)
    }

    fn start_task(&mut self, index: usize) -> Result<()> {
        let Some(spec) = self.tasks.as_ref().and_then(|t| t.tasks.get(index)).cloned() else {
            self.task = None;
            self.send_view_state();
            return Ok(());
        };
        self.selected.clear();
        self.record(SessionEvent::TaskStart { index, spec: spec.clone() });
        let phase = match &spec {
            TaskSpec::OrientOverviewDetail { .. } => Phase::AwaitStart,
            TaskSpec::FollowPath { path } => Phase::Follow {
                progress: FopProgress::new(path.clone())?,
                started_at: None,
                travel_to: None,
            },
            _ => Phase::Ready,
        };
        self.task = Some(ActiveTask { index, spec: spec.clone(), start_tick: self.tick, phase });
        self.send(ServerMessage::TaskPrompt(spec.prompt(index)));
        match spec.start() {
            crate::tasks::StartPlacement::Node(v) => self.place_at(v)?,
            crate::tasks::StartPlacement::Overview => self.place_overview(),
        }
        Ok(())
    }

    fn complete_task(&mut self, result: TaskResult) -> Result<()> {
        let task = self.task.take().expect("completing an active task");
        self.record(SessionEvent::TaskEnd { index: task.index, result: result.clone() });
        self.results.push(result.clone());
        self.send(ServerMessage::TaskComplete { index: task.index, result });
        self.start_task(task.index + 1)
    }

    fn view_for(&self, user: Option<NodeId>) -> Result<EgoViewState> {
        match user {
            Some(v) => apply_condition(
                &self.scene.graph,
                &self.scene.positions,
                self.config.condition,
                Some(v),
                self.scene.calibration.bubble_radius,
            ),
            None => Ok(EgoViewState::plain(self.config.condition)),
        }
    }

    /// Instant placement at a node (task starts).
    fn place_at(&mut self, node: NodeId) -> Result<()> {
        self.motion = None;
        self.fly_axes = (0.0, 0.0);
        self.pose = self.pose.moved_to(self.scene.positions[node]);
        self.perspective = Perspective::Detail;
        self.user_node = Some(node);
        self.visited.insert(node);
        self.view = self.view_for(Some(node))?;
        self.send_view_state();
        self.send_hud();
        Ok(())
    }

    fn place_overview(&mut self) {
        self.motion = None;
        self.fly_axes = (0.0, 0.0);
        self.pose = self.pose.moved_to(self.scene.overview.position);
        self.perspective = Perspective::Overview;
        self.user_node = None;
        self.view = EgoViewState::plain(self.config.condition);
        self.send_view_state();
    }

    fn begin_motion(
        &mut self,
        to: Vec3,
        seconds: f64,
        user_after: Option<NodeId>,
        perspective_after: Perspective,
    ) -> Result<()> {
        if self.motion.is_some() {
            self.finish_motion()?;
        }
        let to_view = self.view_for(user_after)?;
        let from_view = self.view.clone();
        let moving: Vec<NodeId> = from_view
            .displaced_positions
            .keys()
            .chain(to_view.displaced_positions.keys())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        self.fly_axes = (0.0, 0.0);
        self.motion = Some(Motion {
            from: self.pose.position,
            to,
            start: self.tick,
            end: self.tick + seconds_to_ticks(seconds),
            from_view,
            to_view,
            moving,
            user_after,
            perspective_after,
        });
        Ok(())
    }

    fn begin_jump(&mut self, node: NodeId) -> Result<()> {
        self.begin_motion(self.scene.positions[node], JUMP_SECONDS, Some(node), Perspective::Detail)
    }

    fn switch_view(&mut self) -> Result<()> {
        if self.motion.is_some() {
            self.finish_motion()?;
        }
        match self.perspective {
            Perspective::Detail => {
                let target = self.scene.overview.position;
                self.begin_motion(target, TELEPORT_SECONDS, None, Perspective::Overview)
            }
            Perspective::Overview => {
                let node = self.user_node.or_else(|| self.nearest_node()).expect("scene has nodes");
                self.begin_motion(self.scene.positions[node], TELEPORT_SECONDS, Some(node), Perspective::Detail)
            }
        }
    }

    fn nearest_node(&self) -> Option<NodeId> {
        let p = self.pose.position;
        self.scene
            .positions
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - p).norm_squared().total_cmp(&(b.1 - p).norm_squared()))
            .map(|(i, _)| i)
    }

    fn moving_positions(&self, m: &Motion, s: f64) -> Vec<NodePosition> {
        m.moving
            .iter()
            .map(|&v| NodePosition {
                node: v,
                position: blend(
                    &m.from_view.position_of(v, &self.scene.positions),
                    &m.to_view.position_of(v, &self.scene.positions),
                    s,
                ),
            })
            .collect()
    }

    fn finish_motion(&mut self) -> Result<()> {
        let Some(m) = self.motion.take() else {
            return Ok(());
        };
        self.pose = self.pose.moved_to(m.to);
        let positions = self.moving_positions(&m, 1.0);
        self.send(ServerMessage::AnimUpdate { positions, pose: self.pose, t: 1.0 });
        self.user_node = m.user_after;
        self.perspective = m.perspective_after;
        self.view = m.to_view;
        if let Some(v) = m.user_after {
            self.visited.insert(v);
        }
        self.send_view_state();
        self.send_hud();
        if let Some(v) = m.user_after {
            self.arrive(v)?;
        }
        Ok(())
    }

    /// Follow-path bookkeeping once the user reaches `node`.
    fn arrive(&mut self, node: NodeId) -> Result<()> {
        let now = self.tick;
        let done = match self.task.as_mut() {
            Some(ActiveTask { phase: Phase::Follow { progress, started_at, .. }, .. }) => {
                progress.arrived(node).then(|| started_at.unwrap_or(now))
            }
            _ => None,
        };
        match done {
            Some(started) => self.complete_task(TaskResult::new(TaskKind::FollowPath, ticks_to_seconds(now - started))),
            None => Ok(()),
        }
    }

    fn check_arrival(&mut self) -> Result<()> {
        let Some(target) = self.follow_travel_target() else {
            return Ok(());
        };
        let reach = self.scene.calibration.arrival_radius();
        if (self.pose.position - self.scene.positions[target]).norm() > reach {
            return Ok(());
        }
        if let Some(ActiveTask { phase: Phase::Follow { travel_to, .. }, .. }) = self.task.as_mut() {
            *travel_to = None;
        }
        self.arrive(target)
    }

    fn step(&mut self) {
        self.tick += 1;
        if let Some(end) = self.motion.as_ref().map(|m| m.end) {
            if self.tick >= end {
                if let Err(e) = self.finish_motion() {
                    self.send(ServerMessage::Error { message: e.to_string(), ref_seq: None });
                }
            } else {
                let m = self.motion.as_ref().expect("motion present");
                let t = m.progress(self.tick);
                let s = ease(t);
                let positions = self.moving_positions(m, s);
                let position = blend(&m.from, &m.to, s);
                self.pose = self.pose.moved_to(position);
                self.send(ServerMessage::AnimUpdate { positions, pose: self.pose, t });
            }
            return;
        }
        let (ax, ay) = self.fly_axes;
        if ax != 0.0 || ay != 0.0 {
            self.pose = fly_step(&self.pose, ax, ay, 1.0 / TICK_HZ as f64, &self.nav);
            self.send(ServerMessage::AnimUpdate { positions: vec![], pose: self.pose, t: 1.0 });
            if let Err(e) = self.check_arrival() {
                self.send(ServerMessage::Error { message: e.to_string(), ref_seq: None });
            }
        }
    }

    fn task_highlight(&self) -> Vec<NodeId> {
        let Some(task) = &self.task else {
            return vec![];
        };
        match (&task.spec, &task.phase) {
            (TaskSpec::OrientOverviewDetail { start, end }, Phase::AwaitStart) => vec![*start, *end],
            (TaskSpec::OrientOverviewDetail { .. }, _) => vec![],
            (TaskSpec::FollowPath { .. }, Phase::Follow { progress, .. }) => {
                progress.highlighted_node().into_iter().collect()
            }
            (spec, _) => spec.highlighted(),
        }
    }

    fn send_view_state(&mut self) {
        let g = &self.scene.graph;
        let payload = ViewStatePayload {
            perspective: self.perspective,
            view: self.view.clone(),
            task_highlight: self.task_highlight(),
            selected: self.selected.iter().copied().collect(),
            bookmarks: self.bookmarks.iter().copied().collect(),
            visited: self.visited.iter().copied().collect(),
            hovered: self.hovered,
            lowlight: self.hovered.and_then(|h| lowlight_set(g, h).ok()),
            geodesic_colors: self.user_node.and_then(|u| geodesic_colors(g, u).ok()),
        };
        self.send(ServerMessage::ViewState(Box::new(payload)));
    }

    fn send_hud(&mut self) {
        if let Some(v) = self.user_node {
            let g = &self.scene.graph;
            let label = g.label(v).unwrap_or_default().to_owned();
            let degree = g.degree(v).unwrap_or_default();
            self.send(ServerMessage::HudInfo { node: v, label, degree });
        }
    }
}

/// Limits wide enough to accept task sets generated for training scenes.
fn relaxed_bounds() -> crate::tasks::TaskConstraints {
    crate::tasks::TaskConstraints {
        fin_degree: 1..=usize::MAX,
        fcn_common: 1..=usize::MAX,
        end_degree: 1..=usize::MAX,
        fip_nodes: 2..=usize::MAX,
        fop_nodes: 5,
    }
}

/// Re-runs a recorded input stream against a fresh session.
pub fn replay(scene: Arc<Scene>, records: &[SessionRecord]) -> Result<Session> {
    let Some(SessionRecord { event: SessionEvent::Start(start), .. }) = records.first() else {
        return Err(Error::Format("log does not begin with session.start".into()));
    };
    let mut session = Session::new(scene, start.config, start.tasks.clone())?;
    for r in &records[1..] {
        session.advance_to(r.tick);
        match &r.event {
            SessionEvent::Input { seq, message } => session.handle(*seq, message.clone()),
            SessionEvent::Rejected { ref_seq, error } => session.reject(*ref_seq, error.clone()),
            SessionEvent::End(_) => {
                session.finish();
            }
            _ => {}
        }
    }
    Ok(session)
}
