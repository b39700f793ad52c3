//! Scripted participants used to exercise the timing model and the pipeline.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::navigation::look_rotation;
use crate::protocol::{ClientMessage, TaskResponse};
use crate::session::{seconds_to_ticks, Session, TICK_HZ};
use crate::tasks::TaskSpec;

pub const CLIENT_VERSION: &str = concat!("egonet-agent/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum AgentAction {
    Send(ClientMessage),
    Wait(u64),
    Done,
}

pub trait Agent {
    fn next(&mut self, session: &Session) -> AgentAction;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locomotion {
    Jump,
    Fly,
}

impl std::str::FromStr for Locomotion {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "jumper" | "jump" => Ok(Self::Jump),
            "flyer" | "fly" => Ok(Self::Fly),
            other => Err(crate::Error::Parameter(format!("unknown agent '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Step {
    Wait(u64),
    Send(ClientMessage),
    /// Orientation answer toward a node, aimed from wherever the user is.
    Point { task: usize, target: NodeId },
    /// Block until the running jump or transition ends.
    AwaitMotion,
    /// Fly straight to a node until the session reports arrival.
    FlyTo(NodeId),
}

/// Perfect participant: knows every answer and always hits its target.
/// Each pick costs the scene's selection time.
pub struct ScriptedAgent {
    locomotion: Locomotion,
    steps: VecDeque<Step>,
    planned_for: Option<usize>,
    flying: bool,
}

impl ScriptedAgent {
    pub fn new(locomotion: Locomotion) -> Self {
        Self {
            locomotion,
            steps: VecDeque::new(),
            planned_for: None,
            flying: false,
        }
    }

    fn plan(&mut self, index: usize, spec: &TaskSpec, think: u64) {
        let mut s = VecDeque::new();
        let pick = |s: &mut VecDeque<Step>, m: ClientMessage| {
            s.push_back(Step::Wait(think));
            s.push_back(Step::Send(m));
        };
        let submit = |response| ClientMessage::TaskSubmit { task_index: index, response };
        match spec {
            TaskSpec::FindNeighbor { target, .. } => pick(&mut s, ClientMessage::Select { node: *target }),
            TaskSpec::CommonNeighbors { truth, .. } => {
                for &v in truth {
                    pick(&mut s, ClientMessage::Select { node: v });
                }
                pick(&mut s, submit(TaskResponse::Done));
            }
            TaskSpec::EstimateDegree { truth_degree, .. } => {
                pick(&mut s, submit(TaskResponse::Estimate { estimate: *truth_degree as i64 }));
            }
            TaskSpec::OrientOverviewDetail { start, end } => {
                pick(&mut s, ClientMessage::Select { node: *start });
                s.push_back(Step::Wait(think));
                s.push_back(Step::Point { task: index, target: *end });
            }
            TaskSpec::FindPath { truth_path, .. } => {
                pick(&mut s, submit(TaskResponse::Path { path: truth_path.clone() }));
            }
            TaskSpec::FollowPath { path } => {
                pick(&mut s, ClientMessage::Select { node: path[0] });
                for &v in &path[1..] {
                    pick(&mut s, ClientMessage::Select { node: v });
                    s.push_back(match self.locomotion {
                        Locomotion::Jump => Step::AwaitMotion,
                        Locomotion::Fly => Step::FlyTo(v),
                    });
                }
            }
            TaskSpec::OrientDetailDetail { target, .. } | TaskSpec::OrientDetailOverview { target } => {
                s.push_back(Step::Wait(think));
                s.push_back(Step::Point { task: index, target: *target });
            }
        }
        self.steps = s;
        self.planned_for = Some(index);
        self.flying = false;
    }
}

impl Agent for ScriptedAgent {
    fn next(&mut self, session: &Session) -> AgentAction {
        if !session.is_started() {
            return AgentAction::Send(ClientMessage::Hello { client_version: CLIENT_VERSION.into() });
        }
        let Some((index, spec)) = session.active_task() else {
            return AgentAction::Done;
        };
        if self.planned_for != Some(index) {
            let think = seconds_to_ticks(session.scene().calibration.select_seconds);
            self.plan(index, &spec.clone(), think);
        }
        loop {
            let Some(step) = self.steps.pop_front() else {
                return AgentAction::Done;
            };
            match step {
                Step::Wait(0) => continue,
                Step::Wait(n) => return AgentAction::Wait(n),
                Step::Send(m) => return AgentAction::Send(m),
                Step::Point { task, target } => {
                    let direction = session.scene().positions[target] - session.pose().position;
                    return AgentAction::Send(ClientMessage::TaskSubmit {
                        task_index: task,
                        response: TaskResponse::Pointing { direction },
                    });
                }
                Step::AwaitMotion => match session.motion_end() {
                    Some(end) => {
                        self.steps.push_front(Step::AwaitMotion);
                        return AgentAction::Wait(end.saturating_sub(session.tick()).max(1));
                    }
                    None => continue,
                },
                Step::FlyTo(node) => {
                    if session.follow_travel_target() != Some(node) {
                        if self.flying {
                            self.flying = false;
                            return AgentAction::Send(ClientMessage::Fly { axis_x: 0.0, axis_y: 0.0, orientation: None });
                        }
                        continue;
                    }
                    self.steps.push_front(Step::FlyTo(node));
                    let offset = session.scene().positions[node] - session.pose().position;
                    if !self.flying {
                        self.flying = true;
                        return AgentAction::Send(ClientMessage::Fly {
                            axis_x: 0.0,
                            axis_y: 1.0,
                            orientation: Some(look_rotation(&offset)),
                        });
                    }
                    let c = &session.scene().calibration;
                    let per_tick = c.max_fly_speed / TICK_HZ as f64;
                    let ticks = ((offset.norm() - c.arrival_radius()) / per_tick).floor();
                    return AgentAction::Wait((ticks as u64).max(1));
                }
            }
        }
    }
}
