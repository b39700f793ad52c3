//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::strategies;
use common::*;
use egonet::egoview::{apply_condition, clip_edge_to_sphere, fibonacci_sphere, ViewCondition};
use egonet::graph::{generate_ba, GeneratorParams, Graph};
use egonet::layout::LayoutParams;
use egonet::math::Vec3;
use egonet::navigation::Ray;
use egonet::protocol::{decode_client, decode_server, encode, Envelope, SessionMode};
use egonet::scene::Scene;
use egonet::session::{SessionConfig, SessionEvent};
use egonet::study::agent::{Agent, Locomotion, ScriptedAgent};
use egonet::study::analysis::analyze;
use egonet::study::log::{EventLog, WallClock};
use egonet::study::plan::{build_plan, StudyPlan, SQUARE};
use egonet::study::run::{library_lookup, replay_log, run_session, simulate_log, GraphScenes, SceneLibrary, StageScene};
use egonet::tasks::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {:.2} s, limit {:.0} s", took.as_secs_f64(), limit.as_secs_f64()))
}

fn scene(n: usize, seed: u64) -> Arc<Scene> {
    let g = generate_ba(GeneratorParams::new(n, 2, seed)).unwrap();
    Arc::new(Scene::build(g, LayoutParams::with_seed(seed)).unwrap())
}

fn graph_sizes() -> Outcome {
    let mut slowest = Duration::ZERO;
    for seed in 0..5 {
        for (n, m) in [(165, 326), (415, 826)] {
            let t = Instant::now();
            let g = generate_ba(GeneratorParams::new(n, 2, seed)).map_err(|e| e.to_string())?;
            slowest = slowest.max(t.elapsed());
            ensure(g.edge_count() == m, || format!("n={n} seed {seed}: {} edges", g.edge_count()))?;
        }
    }
    ensure(slowest < Duration::from_secs(1), || format!("slowest generation {slowest:?}"))?;
    Ok(format!("326 and 826 edges over 5 seeds, slowest {:.1} ms", slowest.as_secs_f64() * 1e3))
}

fn degree_law() -> Outcome {
    let t = Instant::now();
    let g = generate_ba(GeneratorParams::new(10_000, 2, 0)).map_err(|e| e.to_string())?;
    let binned = binned_degree_exponent(&g, 4, 100, 1.5);
    within(Duration::from_secs(10), t)?;
    let raw = fitted_degree_exponent(&g, 4, 100);
    ensure((2.5..=3.5).contains(&binned), || format!("binned {binned:.3}, raw {raw:.3}"))?;
    Ok(format!("log-binned fit {binned:.3} (per-degree fit {raw:.3})"))
}

fn fibonacci() -> Outcome {
    let t = Instant::now();
    let center = Vec3::new(1.0, -2.0, 3.0);
    let mut worst = f64::INFINITY;
    for k in [5, 20, 50, 100] {
        let pts = fibonacci_sphere(k, 4.0, center).map_err(|e| e.to_string())?;
        ensure(pts.len() == k, || format!("k={k}: {} points", pts.len()))?;
        for p in &pts {
            let off = ((p - center).norm() - 4.0).abs();
            ensure(off <= 1e-9, || format!("k={k}: radius off by {off:e}"))?;
        }
        let ratio = min_pairwise_angle(&pts, &center) / ideal_spacing(k);
        ensure(ratio >= 0.7, || format!("k={k}: spacing ratio {ratio:.3}"))?;
        worst = worst.min(ratio);
    }
    within(Duration::from_secs(1), t)?;
    Ok(format!("worst spacing ratio {worst:.3}"))
}

fn clipping() -> Outcome {
    let t = Instant::now();
    let mut rng = TestRng(2024);
    let mut crossing = 0;
    for case in 0..10_000 {
        let center = rng.vec3(5.0);
        let r = rng.range(0.2, 7.0);
        let p0 = rng.vec3(10.0);
        let p1 = rng.vec3(10.0);
        let out = clip_edge_to_sphere(&p0, &p1, &center, r);
        let pieces: Vec<(Vec3, Vec3)> = out.iter().map(|s| (s.0, s.1)).collect();
        for (a, b) in &pieces {
            for i in 0..=50 {
                let x = a + (b - a) * (i as f64 / 50.0);
                ensure((x - center).norm() >= r - 1e-6, || format!("case {case}: sampled point inside"))?;
            }
        }
        let bad = clip_disagreements(&p0, &p1, &center, r, &pieces, 1000, 1e-6);
        ensure(bad == 0, || format!("case {case}: {bad} samples disagree with the dense oracle"))?;
        crossing += usize::from(out.len() == 2);
    }
    within(Duration::from_secs(5), t)?;
    Ok(format!("10000 cases, {crossing} split in two"))
}

fn bubble_locality() -> Outcome {
    let t = Instant::now();
    let s = scene(415, 6);
    let (g, base) = (&s.graph, &s.positions);
    let mut rng = TestRng(5);
    for _ in 0..100 {
        let user = rng.below(g.node_count());
        let state = apply_condition(g, base, ViewCondition::EgoBubble, Some(user), None).map_err(|e| e.to_string())?;
        let neighbors: BTreeSet<usize> = g.neighbors(user).unwrap().iter().copied().collect();
        let displaced: BTreeSet<usize> = state.displaced_positions.keys().copied().collect();
        ensure(displaced == neighbors, || format!("user {user}: displaced set differs from neighbors"))?;
        let eff = state.effective_positions(base);
        for v in g.nodes().filter(|v| !neighbors.contains(v)) {
            let same = eff[v].iter().zip(base[v].iter()).all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(same, || format!("user {user}: node {v} moved"))?;
        }
    }
    within(Duration::from_secs(5), t)?;
    Ok("100 users on n=415, scene build included".into())
}

fn reference_tasks(scene: &Scene, seed: u64) -> TaskSet {
    let mut tasks = generate_tasks(&scene.graph, seed).unwrap();
    for t in &mut tasks.tasks {
        if let TaskSpec::FollowPath { path } = t {
            *path = scene.calibration.reference_path.clone();
        }
    }
    tasks
}

fn fop_time(log: &EventLog) -> Option<f64> {
    let passes = log.passes().ok()?;
    passes[0].1.iter().find_map(|r| match &r.event {
        SessionEvent::TaskEnd { result, .. } if result.kind == Some(TaskKind::FollowPath) => Some(result.completion_time),
        _ => None,
    })
}

fn timing_model() -> Outcome {
    let mut lines = Vec::new();
    for seed in [3, 11, 29] {
        let s = scene(415, seed);
        let tasks = reference_tasks(&s, seed);
        let run = |loco, condition| {
            let mut agent = ScriptedAgent::new(loco);
            let log = simulate_log(s.clone(), &tasks, condition, &mut agent, WallClock::simulated()).map_err(|e| e.to_string())?;
            fop_time(&log).ok_or_else(|| "no FoP result".to_string())
        };
        let jump = run(Locomotion::Jump, ViewCondition::EgoBubble)?;
        let jump_hl = run(Locomotion::Jump, ViewCondition::EgoHighlight)?;
        let fly = run(Locomotion::Fly, ViewCondition::Baseline)?;
        ensure((jump - 15.0).abs() <= 0.1 && (jump_hl - 15.0).abs() <= 0.1, || format!("seed {seed}: jumper {jump} / {jump_hl}"))?;
        ensure((fly - 25.0).abs() <= 7.5, || format!("seed {seed}: flyer {fly:.2}"))?;
        ensure(fly / jump >= 1.5, || format!("seed {seed}: ratio {:.2}", fly / jump))?;
        lines.push(format!("seed {seed}: jump {jump:.2} s, fly {fly:.2} s, ratio {:.2}", fly / jump));
    }
    Ok(lines.join("; "))
}

fn topology() -> Outcome {
    let t = Instant::now();
    let mut rng = TestRng(99);
    let mut pairs = 0;
    for i in 0..50 {
        // Half preferential attachment, half uniform with extra chords.
        let g = if i % 2 == 0 {
            generate_ba(GeneratorParams::new(50, 1 + i % 3, i as u64)).map_err(|e| e.to_string())?
        } else {
            random_connected_graph(50, rng.below(80), &mut rng)
        };
        let fw = floyd_warshall(&g);
        for u in g.nodes() {
            let d = g.geodesic_distances(u).map_err(|e| e.to_string())?;
            for v in g.nodes() {
                ensure(d[v] == Some(fw[u][v]), || format!("graph {i}: distance {u}-{v}"))?;
                let p = g.shortest_path(u, v).map_err(|e| e.to_string())?;
                let valid = p.first() == Some(&u) && p.last() == Some(&v) && p.windows(2).all(|w| fw[w[0]][w[1]] == 1);
                ensure(valid && p.len() == fw[u][v] + 1, || format!("graph {i}: path {u}-{v}"))?;
                if u != v {
                    let cn = g.common_neighbors(u, v).map_err(|e| e.to_string())?;
                    ensure(cn == brute_common_neighbors(&g, u, v), || format!("graph {i}: common {u}-{v}"))?;
                }
                pairs += 1;
            }
        }
    }
    within(Duration::from_secs(10), t)?;
    Ok(format!("{pairs} ordered pairs"))
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

fn scoring() -> Outcome {
    let fcn = |p: &[usize], t: &[usize]| score_fcn(&set(p), &set(t)).map(|s| (s.correctness_rate, s.miss_rate, s.false_positive_rate));
    ensure(fcn(&[1, 2], &[1, 2]) == Ok((1.0, 0.0, 0.0)), || "FCN exact".into())?;
    ensure(fcn(&[], &[1, 2]) == Ok((0.0, 1.0, 0.0)), || "FCN empty".into())?;
    ensure(fcn(&[1, 3], &[1, 2]) == Ok((0.5, 0.5, 0.5)), || "FCN half".into())?;

    let end = |r: i64, t: usize| score_end(r, t).map(|s| (s.judgement_error, s.signed_error));
    ensure(end(40, 40) == Ok((0.0, 0.0)), || "END exact".into())?;
    ensure(end(30, 40) == Ok((0.25, -0.25)), || "END under".into())?;
    ensure(end(50, 40) == Ok((0.25, 0.25)), || "END over".into())?;

    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (5, 6), (6, 7), (7, 8), (8, 9), (9, 4)];
    let g = Graph::from_edges(10, edges).map_err(|e| e.to_string())?;
    let truth = [0, 1, 2, 3, 4];
    ensure(score_fip(&truth, &g, &truth) == FipScore { path_correct: true, path_deviation: Some(1.0) }, || "FiP truth".into())?;
    ensure(score_fip(&[0, 5, 6, 7, 8, 9, 4], &g, &truth).path_deviation == Some(1.5), || "FiP detour".into())?;
    ensure(!score_fip(&[0, 2, 3, 4], &g, &truth).path_correct, || "FiP broken path".into())?;

    let ray = |d: Vec3| Ray::new(Vec3::zeros(), d).unwrap();
    let target = Vec3::new(0.0, 0.0, -5.0);
    ensure(score_so(&ray(-Vec3::z()), &target).ok() == Some(0.0), || "SO on target".into())?;
    ensure(score_so(&ray(Vec3::z()), &target).ok() == Some(180.0), || "SO opposite".into())?;
    let right = score_so(&ray(Vec3::x()), &target).map_err(|e| e.to_string())?;
    ensure((right - 90.0).abs() < 1e-12, || format!("SO right angle {right}"))?;
    Ok("FCN, END, FiP and SO examples exact".into())
}

/// Checks the Latin and orthogonality properties from the cells alone.
fn graeco_latin(plan: &StudyPlan) -> Result<(), String> {
    let sq = &plan.square;
    let full = |it: &mut dyn Iterator<Item = usize>| it.collect::<BTreeSet<_>>().len() == SQUARE;
    for i in 0..SQUARE {
        let cond = |c: ViewCondition| ViewCondition::ALL.iter().position(|&x| x == c).unwrap();
        ensure(full(&mut sq[i].iter().map(|c| cond(c.condition))), || format!("row {i} repeats a condition"))?;
        ensure(full(&mut sq[i].iter().map(|c| c.graph)), || format!("row {i} repeats a graph"))?;
        ensure(full(&mut sq.iter().map(|r| cond(r[i].condition))), || format!("column {i} repeats a condition"))?;
        ensure(full(&mut sq.iter().map(|r| r[i].graph)), || format!("column {i} repeats a graph"))?;
    }
    let pairs: BTreeSet<_> = sq.iter().flatten().collect();
    ensure(pairs.len() == SQUARE * SQUARE, || "condition/graph pairs repeat".into())?;
    for row in &plan.rows {
        ensure(row.cells == sq[row.participant % SQUARE], || format!("participant {} off the square", row.participant))?;
    }
    Ok(())
}

fn agent_for(condition: ViewCondition) -> Box<dyn Agent> {
    let locomotion = if condition.is_egocentric() { Locomotion::Jump } else { Locomotion::Fly };
    Box::new(ScriptedAgent::new(locomotion))
}

fn library() -> SceneLibrary {
    (0..SQUARE)
        .map(|i| {
            let seed = 200 + i as u64;
            let (small, large) = (scene(165, seed), scene(415, seed));
            let small_tasks = generate_tasks_with(&small.graph, seed, &TaskConstraints::relaxed_for(&small.graph)).unwrap();
            let large_tasks = generate_tasks(&large.graph, seed).unwrap();
            let pair = GraphScenes {
                training: StageScene { scene: small, tasks: small_tasks },
                measured: StageScene { scene: large, tasks: large_tasks },
            };
            (i, pair)
        })
        .collect()
}

fn study_plan() -> Outcome {
    for participants in [3, 25] {
        for seed in 0..200 {
            let plan = build_plan(participants, seed).map_err(|e| e.to_string())?;
            ensure(plan.rows.len() == participants, || "row count".into())?;
            graeco_latin(&plan).map_err(|e| format!("{participants} participants, seed {seed}: {e}"))?;
        }
    }
    let scenes = library();
    let plan = build_plan(3, 7).map_err(|e| e.to_string())?;
    let mut passes = 0;
    for row in &plan.rows {
        let log = run_session(row.participant, &row.cells, &scenes, &mut agent_for, WallClock::simulated()).map_err(|e| e.to_string())?;
        for c in replay_log(&log, &mut library_lookup(&scenes)).map_err(|e| e.to_string())? {
            ensure(c.is_identical(), || format!("participant {} pass {} differs on replay", row.participant, c.pass.pass))?;
            ensure(c.logged.len() == TaskKind::ORDER.len(), || "missing results".into())?;
            passes += 1;
        }
    }
    Ok(format!("plans over 200 seeds each, {passes} simulated passes replay identically"))
}

/// Overwrites one field of every logged result of `kind`.
fn inject(log: &mut EventLog, kind: TaskKind, field: &str, value: f64) {
    for r in log.records.iter_mut().filter(|r| r.kind == "task.end") {
        let result = &mut r.payload["data"]["result"];
        if result["kind"] == serde_json::to_value(kind).unwrap() {
            result[field] = value.into();
        }
    }
}

fn analysis() -> Outcome {
    let s = scene(165, 12);
    let tasks = generate_tasks_with(&s.graph, 12, &TaskConstraints::relaxed_for(&s.graph)).map_err(|e| e.to_string())?;
    let mut agent = ScriptedAgent::new(Locomotion::Jump);
    let template = simulate_log(s, &tasks, ViewCondition::EgoHighlight, &mut agent, WallClock::simulated()).map_err(|e| e.to_string())?;

    let fin = [10.0, 12.0, 11.0, 13.0, 400.0];
    let fcn = [2.0, 4.0, 8.0, 16.0, 64.0];
    let end = [0.1, 0.2, 0.3, 0.4, 5.0];
    let logs: Vec<(String, EventLog)> = (0..5)
        .map(|i| {
            let mut log = template.clone();
            inject(&mut log, TaskKind::FindNeighbor, "completion_time", fin[i]);
            inject(&mut log, TaskKind::CommonNeighbors, "completion_time", fcn[i]);
            inject(&mut log, TaskKind::EstimateDegree, "judgement_error", end[i]);
            (format!("synthetic{i}"), log)
        })
        .collect();
    let report = analyze(&logs).map_err(|e| e.to_string())?;

    // Times are fenced on the log scale: 400 is an outlier, 64 is not.
    // Errors are fenced as they are: 5.0 is an outlier.
    let expected = [
        (TaskKind::FindNeighbor, "completion_time", 4, 11.5, 11.5),
        (TaskKind::CommonNeighbors, "completion_time", 5, 18.8, 8.0),
        (TaskKind::EstimateDegree, "judgement_error", 4, 0.25, 0.25),
    ];
    for (kind, measure, kept, mean, median) in expected {
        let row = report
            .get(kind, ViewCondition::EgoHighlight, measure)
            .ok_or_else(|| format!("no {kind:?} {measure} row"))?;
        ensure(row.kept == kept, || format!("{kind:?} {measure}: kept {} of {}", row.kept, row.count))?;
        ensure((row.mean - mean).abs() <= 1e-9, || format!("{kind:?} {measure}: mean {}", row.mean))?;
        ensure((row.median - median).abs() <= 1e-9, || format!("{kind:?} {measure}: median {}", row.median))?;
    }
    let sd = report.get(TaskKind::FindNeighbor, ViewCondition::EgoHighlight, "completion_time").unwrap().sd;
    ensure((sd - (5.0f64 / 3.0).sqrt()).abs() <= 1e-9, || format!("FiN sd {sd}"))?;
    Ok("3 injected measures match hand-computed mean, median and sd".into())
}

fn protocol() -> Outcome {
    let run = |cases, f: &mut dyn FnMut(&mut TestRunner) -> Result<(), String>| f(&mut TestRunner::new(Config { failure_persistence: None, ..Config::with_cases(cases) }));
    run(512, &mut |r| {
        let strategy = (any::<u64>(), 0.0f64..1e9, strategies::client_message());
        r.run(&strategy, |(seq, t, m)| {
            let env = Envelope { seq, session_seconds: t, message: m };
            let back = decode_client(&encode(&env)).map_err(|e| TestCaseError::fail(e.message))?;
            prop_assert_eq!(back, env);
            Ok(())
        })
        .map_err(|e| format!("client roundtrip: {e}"))
    })?;
    let sc = strategies::small_scene();
    run(128, &mut |r| {
        let strategy = (any::<u64>(), 0.0f64..1e9, strategies::server_message(sc.clone()));
        r.run(&strategy, |(seq, t, m)| {
            let env = Envelope { seq, session_seconds: t, message: m };
            let back = decode_server(&encode(&env)).map_err(|e| TestCaseError::fail(e.message))?;
            prop_assert_eq!(back, env);
            Ok(())
        })
        .map_err(|e| format!("server roundtrip: {e}"))
    })?;
    run(48, &mut |r| {
        let script = prop::collection::vec((strategies::session_input(80), 0u64..200, 0u64..3), 1..40);
        let strategy = (any::<bool>(), strategies::condition(), script);
        r.run(&strategy, |(study, condition, script)| {
            let mode = if study { SessionMode::Study } else { SessionMode::Free };
            let tasks = study.then(|| strategies::small_tasks(&sc));
            let config = SessionConfig { condition, mode };
            strategies::check_equivalence(sc.clone(), config, tasks, &strategies::number(script)).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("engine equivalence: {e}"))
    })?;
    Ok("512 client and 128 server roundtrips, 48 wire/replay scripts".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("graph sizes", graph_sizes),
        ("degree law", degree_law),
        ("fibonacci sphere", fibonacci),
        ("clipping soundness", clipping),
        ("ego-bubble locality", bubble_locality),
        ("timing model", timing_model),
        ("topology oracles", topology),
        ("scoring exactness", scoring),
        ("study plan", study_plan),
        ("analysis pipeline", analysis),
        ("protocol", protocol),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
