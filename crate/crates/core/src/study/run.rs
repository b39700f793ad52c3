//! Running sessions against agents and replaying their logs.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::egoview::ViewCondition;
use crate::error::{Error, Result};
use crate::protocol::{ServerMessage, SessionMode};
use crate::scene::Scene;
use crate::session::{replay, Session, SessionConfig, SessionEvent, SessionRecord, SessionSnapshot};
use crate::study::agent::{Agent, AgentAction};
use crate::study::log::{EventLog, PassInfo, Stage, WallClock};
use crate::study::plan::PlanCell;
use crate::tasks::{TaskResult, TaskSet};

/// Upper bound on simulated time per pass (one hour).
const MAX_PASS_TICKS: u64 = 60 * 60 * 60;
/// Upper bound on messages sent without time advancing.
const MAX_BURST: usize = 10_000;

#[derive(Debug, Clone)]
pub struct StageScene {
    pub scene: Arc<Scene>,
    pub tasks: TaskSet,
}

#[derive(Debug, Clone)]
pub struct GraphScenes {
    pub training: StageScene,
    pub measured: StageScene,
}

impl GraphScenes {
    pub fn stage(&self, stage: Stage) -> &StageScene {
        match stage {
            Stage::Training => &self.training,
            Stage::Measured => &self.measured,
        }
    }
}

/// Scenes keyed by plan graph id.
pub type SceneLibrary = BTreeMap<usize, GraphScenes>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StudyHeader {
    participant: usize,
    cells: Vec<PlanCell>,
}

/// Drives one study-mode session with `agent` until the agent is done.
/// Any error the session reports back is treated as a failure of the run.
pub fn run_pass(
    scene: Arc<Scene>,
    tasks: &TaskSet,
    condition: ViewCondition,
    agent: &mut dyn Agent,
) -> Result<(Vec<SessionRecord>, SessionSnapshot)> {
    let config = SessionConfig { condition, mode: SessionMode::Study };
    let mut session = Session::new(scene, config, Some(tasks.clone()))?;
    let mut seq = 0;
    let mut burst = 0;
    loop {
        match agent.next(&session) {
            AgentAction::Send(message) => {
                burst += 1;
                if burst > MAX_BURST {
                    return Err(Error::Protocol("agent keeps sending without letting time pass".into()));
                }
                seq += 1;
                session.handle(seq, message);
            }
            AgentAction::Wait(n) => {
                burst = 0;
                session.advance_ticks(n);
            }
            AgentAction::Done => break,
        }
        for env in session.drain_outbox() {
            if let ServerMessage::Error { message, .. } = env.message {
                return Err(Error::Protocol(format!("session rejected agent input: {message}")));
            }
        }
        if session.tick() > MAX_PASS_TICKS {
            return Err(Error::Protocol("agent did not finish within the time limit".into()));
        }
    }
    if !session.tasks_finished() {
        return Err(Error::Protocol("agent stopped before finishing the tasks".into()));
    }
    let snapshot = session.finish();
    Ok((session.drain_records(), snapshot))
}

/// Tutorial stub, then a training and a measured pass per plan cell.
pub fn run_session(
    participant: usize,
    row: &[PlanCell],
    scenes: &SceneLibrary,
    make_agent: &mut dyn FnMut(ViewCondition) -> Box<dyn Agent>,
    clock: WallClock,
) -> Result<EventLog> {
    for cell in row {
        if !scenes.contains_key(&cell.graph) {
            return Err(Error::MissingScene(cell.graph));
        }
    }
    let mut log = EventLog::new();
    let header = StudyHeader { participant, cells: row.to_vec() };
    log.push(clock, 0.0, "study.start", serde_json::to_value(&header)?)?;
    if row.is_empty() {
        return Ok(log);
    }
    log.push(clock, 0.0, "tutorial", serde_json::json!({"stub": true}))?;
    let mut offset = 0;
    let mut pass = 0;
    for cell in row {
        for stage in [Stage::Training, Stage::Measured] {
            let s = scenes[&cell.graph].stage(stage);
            let mut agent = make_agent(cell.condition);
            let (records, snapshot) = run_pass(s.scene.clone(), &s.tasks, cell.condition, agent.as_mut())?;
            let info = PassInfo { pass, condition: cell.condition, graph: cell.graph, stage, offset_ticks: offset };
            for r in &records {
                log.push_session_record(clock, info, r)?;
            }
            offset += snapshot.tick;
            pass += 1;
        }
    }
    log.push(clock, log.last_seconds(), "study.end", serde_json::json!({"passes": pass}))?;
    Ok(log)
}

/// A single measured pass wrapped in a complete study log.
pub fn simulate_log(
    scene: Arc<Scene>,
    tasks: &TaskSet,
    condition: ViewCondition,
    agent: &mut dyn Agent,
    clock: WallClock,
) -> Result<EventLog> {
    let (records, _) = run_pass(scene, tasks, condition, agent)?;
    single_pass_log(condition, &records, true, clock)
}

/// Study log holding one measured pass. Without `complete` the log gets no
/// `study.end` record, and analysis skips it.
pub fn single_pass_log(
    condition: ViewCondition,
    records: &[SessionRecord],
    complete: bool,
    clock: WallClock,
) -> Result<EventLog> {
    let mut log = EventLog::new();
    let header = StudyHeader { participant: 0, cells: vec![PlanCell { condition, graph: 0 }] };
    log.push(clock, 0.0, "study.start", serde_json::to_value(&header)?)?;
    let info = PassInfo { pass: 0, condition, graph: 0, stage: Stage::Measured, offset_ticks: 0 };
    for r in records {
        log.push_session_record(clock, info, r)?;
    }
    if complete {
        log.push(clock, log.last_seconds(), "study.end", serde_json::json!({"passes": 1}))?;
    }
    Ok(log)
}

/// Task results recorded in a pass, in completion order.
pub fn logged_results(records: &[SessionRecord]) -> Vec<TaskResult> {
    records
        .iter()
        .filter_map(|r| match &r.event {
            SessionEvent::TaskEnd { result, .. } => Some(result.clone()),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayCheck {
    pub pass: PassInfo,
    pub logged: Vec<TaskResult>,
    pub replayed: Vec<TaskResult>,
    pub snapshot_matches: bool,
}

impl ReplayCheck {
    pub fn is_identical(&self) -> bool {
        self.snapshot_matches && self.logged == self.replayed
    }
}

/// Replays every pass of `log` through a fresh session. `scene_for` maps
/// a pass to its scene.
pub fn replay_log(
    log: &EventLog,
    scene_for: &mut dyn FnMut(&PassInfo) -> Result<Arc<Scene>>,
) -> Result<Vec<ReplayCheck>> {
    let mut out = Vec::new();
    for (pass, records) in log.passes()? {
        let session = replay(scene_for(&pass)?, &records)?;
        let logged_end = records.iter().rev().find_map(|r| match &r.event {
            SessionEvent::End(s) => Some((**s).clone()),
            _ => None,
        });
        out.push(ReplayCheck {
            pass,
            logged: logged_results(&records),
            replayed: session.results().to_vec(),
            snapshot_matches: logged_end.is_some_and(|s| s == session.snapshot()),
        });
    }
    Ok(out)
}

/// Looks up pass scenes in a library.
pub fn library_lookup(scenes: &SceneLibrary) -> impl FnMut(&PassInfo) -> Result<Arc<Scene>> + '_ {
    |p| {
        scenes
            .get(&p.graph)
            .map(|g| g.stage(p.stage).scene.clone())
            .ok_or(Error::MissingScene(p.graph))
    }
}
