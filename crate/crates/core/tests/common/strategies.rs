//! Generators for protocol messages and session scripts.

use std::sync::Arc;

use egonet::egoview::{apply_condition, geodesic_colors, lowlight_set, ViewCondition};
use egonet::graph::{generate_ba, GeneratorParams};
use egonet::layout::LayoutParams;
use egonet::math::{Quat, Vec3};
use egonet::navigation::Pose;
use egonet::protocol::*;
use egonet::scene::Scene;
use egonet::session::{replay, Session, SessionConfig};
use egonet::tasks::{generate_tasks_with, score_end, TaskConstraints, TaskKind, TaskResult, TaskSet};
use proptest::prelude::*;

pub fn small_scene() -> Arc<Scene> {
    let g = generate_ba(GeneratorParams::new(80, 2, 4)).unwrap();
    Arc::new(Scene::build(g, LayoutParams::with_seed(4)).unwrap())
}

pub fn small_tasks(s: &Scene) -> TaskSet {
    generate_tasks_with(&s.graph, 4, &TaskConstraints::relaxed_for(&s.graph)).unwrap()
}

pub fn float() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

pub fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(float()).prop_map(Vec3::from)
}

pub fn quat() -> impl Strategy<Value = Quat> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-degenerate", |q| q.iter().map(|c| c * c).sum::<f64>() > 1e-6)
        .prop_map(|q| Quat::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3])))
}

pub fn condition() -> impl Strategy<Value = ViewCondition> {
    prop::sample::select(ViewCondition::ALL.to_vec())
}

pub fn response() -> impl Strategy<Value = TaskResponse> {
    prop_oneof![
        Just(TaskResponse::Done),
        any::<i64>().prop_map(|estimate| TaskResponse::Estimate { estimate }),
        prop::collection::vec(0usize..1000, 0..8).prop_map(|path| TaskResponse::Path { path }),
        vec3().prop_map(|direction| TaskResponse::Pointing { direction }),
    ]
}

pub fn client_message() -> impl Strategy<Value = ClientMessage> {
    let node = 0usize..100_000;
    prop_oneof![
        ".{0,12}".prop_map(|client_version| ClientMessage::Hello { client_version }),
        (float(), float(), prop::option::of(quat()))
            .prop_map(|(axis_x, axis_y, orientation)| ClientMessage::Fly { axis_x, axis_y, orientation }),
        (vec3(), vec3()).prop_map(|(origin, direction)| ClientMessage::Pointer { origin, direction }),
        node.clone().prop_map(|node| ClientMessage::Select { node }),
        node.clone().prop_map(|node| ClientMessage::Deselect { node }),
        node.clone().prop_map(|node| ClientMessage::Jump { node }),
        node.prop_map(|node| ClientMessage::Bookmark { node }),
        Just(ClientMessage::SwitchView {}),
        (0usize..8, response()).prop_map(|(task_index, response)| ClientMessage::TaskSubmit { task_index, response }),
        (
            prop::sample::select(vec![Instrument::Ssq, Instrument::Tlx]),
            prop::collection::vec(0u32..200, 0..20),
            prop::option::of(condition())
        )
            .prop_map(|(instrument, items, condition)| {
                ClientMessage::Questionnaire(QuestionnaireResponse { instrument, items, condition })
            }),
    ]
}

pub fn server_message(scene: Arc<Scene>) -> impl Strategy<Value = ServerMessage> {
    let n = scene.graph.node_count();
    let s1 = scene.clone();
    let s2 = scene.clone();
    let s3 = scene.clone();
    let t = small_tasks(&scene);
    prop_oneof![
        (condition(), prop::bool::ANY).prop_map(move |(condition, study)| {
            let mode = if study { SessionMode::Study } else { SessionMode::Free };
            ServerMessage::SceneInit(Box::new(SceneInit { condition, mode, scene: s1.to_file() }))
        }),
        (condition(), 0..n, prop::option::of(0..n), prop::bool::ANY).prop_map(move |(c, user, hovered, colors)| {
            let view = apply_condition(&s2.graph, &s2.positions, c, Some(user), None).unwrap();
            ServerMessage::ViewState(Box::new(ViewStatePayload {
                perspective: Perspective::Detail,
                view,
                task_highlight: vec![user],
                selected: vec![1, 2],
                bookmarks: vec![],
                visited: vec![user],
                hovered,
                lowlight: hovered.map(|h| lowlight_set(&s2.graph, h).unwrap()),
                geodesic_colors: colors.then(|| geodesic_colors(&s2.graph, user).unwrap()),
            }))
        }),
        (prop::collection::vec((0..n, vec3()), 0..10), vec3(), quat(), 0.0f64..=1.0).prop_map(|(ps, p, q, t)| {
            ServerMessage::AnimUpdate {
                positions: ps.into_iter().map(|(node, position)| NodePosition { node, position }).collect(),
                pose: Pose::looking(p, q),
                t,
            }
        }),
        (0usize..8).prop_map(move |i| ServerMessage::TaskPrompt(t.tasks[i].prompt(i))),
        (0usize..8, 0.0f64..500.0, 0i64..80, 1usize..60).prop_map(|(index, time, est, truth)| {
            let result = TaskResult::new(TaskKind::EstimateDegree, time).with_end(est, score_end(est, truth).unwrap());
            ServerMessage::TaskComplete { index, result }
        }),
        (0..n).prop_map(move |node| ServerMessage::HudInfo {
            node,
            label: s3.graph.label(node).unwrap().to_owned(),
            degree: s3.graph.degree(node).unwrap(),
        }),
        (".{0,30}", prop::option::of(any::<u64>())).prop_map(|(message, ref_seq)| ServerMessage::Error { message, ref_seq }),
    ]
}

/// Client messages that mostly make sense for the scene, with some noise.
pub fn session_input(n: usize) -> impl Strategy<Value = ClientMessage> {
    let node = 0..n + 2;
    prop_oneof![
        3 => node.clone().prop_map(|node| ClientMessage::Jump { node }),
        3 => node.clone().prop_map(|node| ClientMessage::Select { node }),
        1 => node.clone().prop_map(|node| ClientMessage::Deselect { node }),
        1 => node.prop_map(|node| ClientMessage::Bookmark { node }),
        2 => (-1.0f64..1.0, -1.0f64..1.0, prop::option::of(quat()))
            .prop_map(|(axis_x, axis_y, orientation)| ClientMessage::Fly { axis_x, axis_y, orientation }),
        1 => (vec3(), prop::array::uniform3(-1.0f64..1.0).prop_map(Vec3::from))
            .prop_map(|(origin, direction)| ClientMessage::Pointer { origin, direction }),
        1 => Just(ClientMessage::SwitchView {}),
        2 => (0usize..8, response()).prop_map(|(task_index, response)| ClientMessage::TaskSubmit { task_index, response }),
    ]
}

pub fn drive(s: &mut Session, script: &[(u64, u64, ClientMessage)], through_wire: bool) -> Vec<Envelope<ServerMessage>> {
    let mut out = Vec::new();
    s.handle(1, ClientMessage::Hello { client_version: "t".into() });
    for (seq, wait, m) in script {
        if through_wire {
            let text = encode(&Envelope { seq: *seq, session_seconds: 0.0, message: m.clone() });
            match decode_client(&text) {
                Ok(env) => s.handle(env.seq, env.message),
                Err(e) => s.reject(e.ref_seq, e.message),
            }
        } else {
            s.handle(*seq, m.clone());
        }
        s.advance_ticks(*wait);
        out.extend(s.drain_outbox());
    }
    out
}


/// Drives the same script directly and through the text encoding, then
/// replays the direct session's record log. Returns a description of the
/// first difference.
pub fn check_equivalence(
    sc: Arc<Scene>,
    cfg: SessionConfig,
    tasks: Option<TaskSet>,
    script: &[(u64, u64, ClientMessage)],
) -> Result<(), String> {
    let mut direct = Session::new(sc.clone(), cfg, tasks.clone()).map_err(|e| e.to_string())?;
    let mut wired = Session::new(sc.clone(), cfg, tasks).map_err(|e| e.to_string())?;
    if drive(&mut direct, script, false) != drive(&mut wired, script, true) {
        return Err("outboxes differ".into());
    }
    if direct.snapshot() != wired.snapshot() {
        return Err("snapshots differ".into());
    }
    let end = direct.finish();
    let records = direct.drain_records();
    let replayed = replay(sc, &records).map_err(|e| e.to_string())?;
    if replayed.snapshot() != end || replayed.results() != direct.results() {
        return Err("replay differs".into());
    }
    Ok(())
}

/// Seq numbers for a script: `bump` 0 repeats the previous seq, 1 and 2
/// advance by one or two.
pub fn number(script: Vec<(ClientMessage, u64, u64)>) -> Vec<(u64, u64, ClientMessage)> {
    let mut seq = 1;
    script
        .into_iter()
        .map(|(m, wait, bump)| {
            seq += bump.min(1) + u64::from(bump == 2);
            (seq - u64::from(bump == 0), wait, m)
        })
        .collect()
}
