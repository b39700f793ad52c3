//! Task battery: seeded generation of the eight task instances and exact
//! scoring of responses.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::math::Vec3;
use crate::navigation::{angular_deviation, Ray};

const TASK_STREAM: u64 = 0x7a5c_0b1e_d3e4_f00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    #[serde(rename = "FiN")]
    FindNeighbor,
    #[serde(rename = "FCN")]
    CommonNeighbors,
    #[serde(rename = "END")]
    EstimateDegree,
    #[serde(rename = "SO_OD")]
    OrientOverviewDetail,
    #[serde(rename = "FiP")]
    FindPath,
    #[serde(rename = "FoP")]
    FollowPath,
    #[serde(rename = "SO_DD")]
    OrientDetailDetail,
    #[serde(rename = "SO_DO")]
    OrientDetailOverview,
}

impl TaskKind {
    /// Presentation order.
    pub const ORDER: [TaskKind; 8] = [
        Self::FindNeighbor,
        Self::CommonNeighbors,
        Self::EstimateDegree,
        Self::OrientOverviewDetail,
        Self::FindPath,
        Self::FollowPath,
        Self::OrientDetailDetail,
        Self::OrientDetailOverview,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::FindNeighbor => "FiN",
            Self::CommonNeighbors => "FCN",
            Self::EstimateDegree => "END",
            Self::OrientOverviewDetail => "SO_OD",
            Self::FindPath => "FiP",
            Self::FollowPath => "FoP",
            Self::OrientDetailDetail => "SO_DD",
            Self::OrientDetailOverview => "SO_DO",
        }
    }

    pub fn is_orientation(self) -> bool {
        matches!(
            self,
            Self::OrientOverviewDetail | Self::OrientDetailDetail | Self::OrientDetailOverview
        )
    }

    /// Kinds whose completion time is an analyzed measure.
    pub fn has_timed_measure(self) -> bool {
        matches!(
            self,
            Self::FindNeighbor | Self::CommonNeighbors | Self::FindPath | Self::FollowPath
        )
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ORDER
            .into_iter()
            .find(|k| k.code() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown task kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TaskSpec {
    #[serde(rename = "FiN")]
    FindNeighbor { hub: NodeId, target: NodeId, target_label: String },
    #[serde(rename = "FCN")]
    CommonNeighbors { first: NodeId, second: NodeId, truth: Vec<NodeId> },
    #[serde(rename = "END")]
    EstimateDegree { hub: NodeId, truth_degree: usize },
    #[serde(rename = "SO_OD")]
    OrientOverviewDetail { start: NodeId, end: NodeId },
    #[serde(rename = "FiP")]
    FindPath { start: NodeId, end: NodeId, truth_path: Vec<NodeId> },
    #[serde(rename = "FoP")]
    FollowPath { path: Vec<NodeId> },
    /// Pointing back from the end of the followed path to its start.
    #[serde(rename = "SO_DD")]
    OrientDetailDetail { from: NodeId, target: NodeId },
    /// Pointing from the overview to the end of the followed path.
    #[serde(rename = "SO_DO")]
    OrientDetailOverview { target: NodeId },
}

/// Where the user is placed when a task starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "at", content = "node")]
pub enum StartPlacement {
    Node(NodeId),
    Overview,
}

/// The part of a task a participant may see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskPrompt {
    pub index: usize,
    pub kind: TaskKind,
    pub start: StartPlacement,
    pub highlighted: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_label: Option<String>,
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            Self::FindNeighbor { .. } => TaskKind::FindNeighbor,
            Self::CommonNeighbors { .. } => TaskKind::CommonNeighbors,
            Self::EstimateDegree { .. } => TaskKind::EstimateDegree,
            Self::OrientOverviewDetail { .. } => TaskKind::OrientOverviewDetail,
            Self::FindPath { .. } => TaskKind::FindPath,
            Self::FollowPath { .. } => TaskKind::FollowPath,
            Self::OrientDetailDetail { .. } => TaskKind::OrientDetailDetail,
            Self::OrientDetailOverview { .. } => TaskKind::OrientDetailOverview,
        }
    }

    pub fn start(&self) -> StartPlacement {
        match *self {
            Self::FindNeighbor { hub, .. } | Self::EstimateDegree { hub, .. } => StartPlacement::Node(hub),
            Self::CommonNeighbors { first, .. } => StartPlacement::Node(first),
            Self::OrientOverviewDetail { .. } | Self::OrientDetailOverview { .. } => StartPlacement::Overview,
            Self::FindPath { start, .. } => StartPlacement::Node(start),
            Self::FollowPath { ref path } => StartPlacement::Node(path[0]),
            Self::OrientDetailDetail { from, .. } => StartPlacement::Node(from),
        }
    }

    /// Nodes highlighted when the task is presented.
    pub fn highlighted(&self) -> Vec<NodeId> {
        match *self {
            Self::FindNeighbor { .. } | Self::EstimateDegree { .. } => vec![],
            Self::CommonNeighbors { second, .. } => vec![second],
            Self::OrientOverviewDetail { start, end } => vec![start, end],
            Self::FindPath { end, .. } => vec![end],
            Self::FollowPath { ref path } => vec![path[0]],
            Self::OrientDetailDetail { .. } => vec![],
            Self::OrientDetailOverview { .. } => vec![],
        }
    }

    pub fn prompt(&self, index: usize) -> TaskPrompt {
        TaskPrompt {
            index,
            kind: self.kind(),
            start: self.start(),
            highlighted: self.highlighted(),
            target_label: match self {
                Self::FindNeighbor { target_label, .. } => Some(target_label.clone()),
                _ => None,
            },
        }
    }

    /// Node the pointing direction is measured against (orientation tasks).
    pub fn orientation_target(&self) -> Option<NodeId> {
        match *self {
            Self::OrientOverviewDetail { end, .. } => Some(end),
            Self::OrientDetailDetail { target, .. } | Self::OrientDetailOverview { target } => Some(target),
            _ => None,
        }
    }

    fn nodes(&self) -> Vec<NodeId> {
        match self {
            Self::FindNeighbor { hub, target, .. } => vec![*hub, *target],
            Self::CommonNeighbors { first, second, truth } => {
                [*first, *second].into_iter().chain(truth.iter().copied()).collect()
            }
            Self::EstimateDegree { hub, .. } => vec![*hub],
            Self::OrientOverviewDetail { start, end } => vec![*start, *end],
            Self::FindPath { truth_path, .. } => truth_path.clone(),
            Self::FollowPath { path } => path.clone(),
            Self::OrientDetailDetail { from, target } => vec![*from, *target],
            Self::OrientDetailOverview { target } => vec![*target],
        }
    }

    /// Checks the instance against the graph and the generation limits.
    pub fn validate(&self, g: &Graph, limits: &TaskConstraints) -> Result<()> {
        for v in self.nodes() {
            if !g.contains(v) {
                return Err(Error::UnknownNode(v));
            }
        }
        let bad = |what: &str| Err(Error::TaskGeneration(format!("{}: {what}", self.kind())));
        match self {
            Self::FindNeighbor { hub, target, target_label } => {
                if !limits.fin_degree.contains(&g.degree(*hub)?) {
                    return bad("hub degree out of range");
                }
                if !g.has_edge(*hub, *target) || g.label(*target)? != target_label {
                    return bad("target is not a labelled neighbor of the hub");
                }
            }
            Self::CommonNeighbors { first, second, truth } => {
                if first == second || g.common_neighbors(*first, *second)? != *truth {
                    return bad("common neighbor set does not match the graph");
                }
                if !limits.fcn_common.contains(&truth.len()) {
                    return bad("common neighbor count out of range");
                }
            }
            Self::EstimateDegree { hub, truth_degree } => {
                if g.degree(*hub)? != *truth_degree || !limits.end_degree.contains(truth_degree) {
                    return bad("hub degree out of range");
                }
            }
            Self::FindPath { start, end, truth_path } => {
                if g.shortest_path(*start, *end)? != *truth_path || !limits.fip_nodes.contains(&truth_path.len()) {
                    return bad("truth path is not a shortest path of the allowed length");
                }
            }
            Self::FollowPath { path } => {
                if path.len() != limits.fop_nodes || !is_walk(g, path) {
                    return bad("path is not a walk of the required length");
                }
            }
            Self::OrientOverviewDetail { start, end } | Self::OrientDetailDetail { from: start, target: end } => {
                if start == end {
                    return bad("orientation needs two distinct nodes");
                }
            }
            Self::OrientDetailOverview { .. } => {}
        }
        Ok(())
    }
}

fn is_walk(g: &Graph, path: &[NodeId]) -> bool {
    path.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

/// Range limits applied when choosing task entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskConstraints {
    pub fin_degree: std::ops::RangeInclusive<usize>,
    pub fcn_common: std::ops::RangeInclusive<usize>,
    pub end_degree: std::ops::RangeInclusive<usize>,
    /// Node count of the FiP shortest path.
    pub fip_nodes: std::ops::RangeInclusive<usize>,
    /// Node count of the FoP path.
    pub fop_nodes: usize,
}

impl Default for TaskConstraints {
    fn default() -> Self {
        Self {
            fin_degree: 14..=44,
            fcn_common: 1..=5,
            end_degree: 21..=53,
            fip_nodes: 4..=5,
            fop_nodes: 5,
        }
    }
}

impl TaskConstraints {
    /// Hub degrees scaled down so small training graphs stay feasible: each
    /// degree window keeps its upper bound but its lower bound drops to the
    /// graph's largest degree when that falls short.
    pub fn relaxed_for(g: &Graph) -> Self {
        let d = g.max_degree();
        let mut c = Self::default();
        let relax = |r: &std::ops::RangeInclusive<usize>| (*r.start()).min(d).max(1)..=*r.end();
        c.fin_degree = relax(&c.fin_degree);
        c.end_degree = relax(&c.end_degree);
        c
    }
}

/// Eight task instances in presentation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSet {
    pub seed: u64,
    pub tasks: Vec<TaskSpec>,
}

impl TaskSet {
    pub fn validate(&self, g: &Graph, limits: &TaskConstraints) -> Result<()> {
        let kinds: Vec<TaskKind> = self.tasks.iter().map(TaskSpec::kind).collect();
        if kinds != TaskKind::ORDER {
            return Err(Error::TaskGeneration("tasks are not in presentation order".into()));
        }
        for t in &self.tasks {
            t.validate(g, limits)?;
        }
        Ok(())
    }

    pub fn get(&self, kind: TaskKind) -> &TaskSpec {
        let i = TaskKind::ORDER.iter().position(|&k| k == kind).expect("kind in order");
        &self.tasks[i]
    }
}

/// Picks one candidate, preferring those that avoid `used`.
fn pick<T: Clone>(
    rng: &mut ChaCha8Rng,
    candidates: &[T],
    used: &BTreeSet<NodeId>,
    touches: impl Fn(&T) -> Vec<NodeId>,
) -> Option<T> {
    // The first fresh entry of a uniform shuffle is uniform over the fresh
    // entries, and only a prefix has to be inspected.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.shuffle(rng);
    let fresh = |&&i: &&usize| touches(&candidates[i]).iter().all(|v| !used.contains(v));
    order.iter().find(fresh).or(order.first()).map(|&i| candidates[i].clone())
}

pub fn generate_tasks(g: &Graph, seed: u64) -> Result<TaskSet> {
    generate_tasks_with(g, seed, &TaskConstraints::default())
}

/// Samples every entity uniformly among the qualifying candidates, keeping
/// entities of different tasks disjoint whenever some candidate allows it.
pub fn generate_tasks_with(g: &Graph, seed: u64, limits: &TaskConstraints) -> Result<TaskSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TASK_STREAM);
    let mut used = BTreeSet::new();
    let unmet = |what: String| Error::TaskGeneration(format!("no candidate satisfies {what}"));
    let degree_in = |r: &std::ops::RangeInclusive<usize>| -> Vec<NodeId> {
        g.nodes().filter(|&v| r.contains(&g.neighbors(v).map_or(0, <[_]>::len))).collect()
    };

    let fin_hubs = degree_in(&limits.fin_degree);
    let hub = pick(&mut rng, &fin_hubs, &used, |&v| vec![v])
        .ok_or_else(|| unmet(format!("FiN hub degree in {:?}", limits.fin_degree)))?;
    let target = *g.neighbors(hub)?.choose(&mut rng).expect("hub has neighbors");
    let fin = TaskSpec::FindNeighbor { hub, target, target_label: g.label(target)?.to_owned() };
    used.extend([hub, target]);

    let mut pairs = Vec::new();
    for u in g.nodes() {
        for v in u + 1..g.node_count() {
            let common = g.common_neighbors(u, v)?;
            if limits.fcn_common.contains(&common.len()) {
                pairs.push((u, v, common));
            }
        }
    }
    let (first, second, truth) = pick(&mut rng, &pairs, &used, |(u, v, c)| {
        [*u, *v].into_iter().chain(c.iter().copied()).collect()
    })
    .ok_or_else(|| unmet(format!("FCN common neighbor count in {:?}", limits.fcn_common)))?;
    used.extend([first, second]);
    used.extend(truth.iter().copied());
    let fcn = TaskSpec::CommonNeighbors { first, second, truth };

    let end_hubs = degree_in(&limits.end_degree);
    let end_hub = pick(&mut rng, &end_hubs, &used, |&v| vec![v])
        .ok_or_else(|| unmet(format!("END hub degree in {:?}", limits.end_degree)))?;
    used.insert(end_hub);
    let end = TaskSpec::EstimateDegree { hub: end_hub, truth_degree: g.degree(end_hub)? };

    let hops = |r: &std::ops::RangeInclusive<usize>| (*r.start()).saturating_sub(1)..=(*r.end()).saturating_sub(1);
    let fip_hops = hops(&limits.fip_nodes);
    let fop_hops = limits.fop_nodes.saturating_sub(1);
    let mut fip_pairs = Vec::new();
    let mut fop_pairs = Vec::new();
    for u in g.nodes() {
        let dist = g.geodesic_distances(u)?;
        for (v, d) in dist.iter().enumerate() {
            if let Some(d) = *d {
                if fip_hops.contains(&d) && fip_hops.start() > &0 {
                    fip_pairs.push((u, v));
                }
                if d == fop_hops && d > 0 {
                    fop_pairs.push((u, v));
                }
            }
        }
    }
    let path_nodes = |&(u, v): &(NodeId, NodeId)| g.shortest_path(u, v).unwrap_or_default();
    let (start, finish) = pick(&mut rng, &fip_pairs, &used, path_nodes)
        .ok_or_else(|| unmet(format!("FiP path of {:?} nodes", limits.fip_nodes)))?;
    let truth_path = g.shortest_path(start, finish)?;
    used.extend(truth_path.iter().copied());
    let so_od = TaskSpec::OrientOverviewDetail { start, end: finish };
    let fip = TaskSpec::FindPath { start, end: finish, truth_path };

    let fop_pair = pick(&mut rng, &fop_pairs, &used, path_nodes)
        .ok_or_else(|| unmet(format!("FoP path of {} nodes", limits.fop_nodes)))?;
    let path = g.shortest_path(fop_pair.0, fop_pair.1)?;
    let (path_start, path_end) = (path[0], *path.last().expect("non-empty path"));
    let fop = TaskSpec::FollowPath { path };

    Ok(TaskSet {
        seed,
        tasks: vec![
            fin,
            fcn,
            end,
            so_od,
            fip,
            fop,
            TaskSpec::OrientDetailDetail { from: path_end, target: path_start },
            TaskSpec::OrientDetailOverview { target: path_end },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcnScore {
    pub correctness_rate: f64,
    pub miss_rate: f64,
    pub false_positive_rate: f64,
}

/// Correctness and miss rates relative to the truth set; false positives
/// relative to the number of picks.
pub fn score_fcn(selected: &BTreeSet<NodeId>, truth: &BTreeSet<NodeId>) -> Result<FcnScore> {
    if truth.is_empty() {
        return Err(Error::Parameter("FCN truth set is empty".into()));
    }
    let hits = selected.intersection(truth).count();
    let wrong = selected.difference(truth).count();
    let t = truth.len() as f64;
    Ok(FcnScore {
        correctness_rate: hits as f64 / t,
        miss_rate: (truth.len() - hits) as f64 / t,
        false_positive_rate: wrong as f64 / selected.len().max(1) as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndScore {
    /// `|estimate - truth| / truth`.
    pub judgement_error: f64,
    /// `(estimate - truth) / truth`; negative means under-estimation.
    pub signed_error: f64,
}

pub fn score_end(estimate: i64, truth_degree: usize) -> Result<EndScore> {
    if estimate < 0 {
        return Err(Error::Input(format!("degree estimate must be non-negative, got {estimate}")));
    }
    if truth_degree == 0 {
        return Err(Error::Parameter("truth degree must be at least 1".into()));
    }
    let signed = (estimate as f64 - truth_degree as f64) / truth_degree as f64;
    Ok(EndScore {
        judgement_error: signed.abs(),
        signed_error: signed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FipScore {
    pub path_correct: bool,
    /// Reported edge count over shortest edge count; only for correct paths.
    pub path_deviation: Option<f64>,
}

pub fn score_fip(reported: &[NodeId], g: &Graph, truth_path: &[NodeId]) -> FipScore {
    let wrong = FipScore {
        path_correct: false,
        path_deviation: None,
    };
    let (Some(first), Some(last)) = (reported.first(), reported.last()) else {
        return wrong;
    };
    if truth_path.len() < 2 || Some(first) != truth_path.first() || Some(last) != truth_path.last() {
        return wrong;
    }
    if !reported.iter().all(|&v| g.contains(v)) || !is_walk(g, reported) {
        return wrong;
    }
    FipScore {
        path_correct: true,
        path_deviation: Some((reported.len() - 1) as f64 / (truth_path.len() - 1) as f64),
    }
}

/// Angular deviation in degrees of a pointing ray from the target.
pub fn score_so(ray: &Ray, target: &Vec3) -> Result<f64> {
    angular_deviation(&ray.origin, &ray.direction, target)
}

/// What a click did to a follow-path task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum FopEvent {
    Ignored,
    /// The start node was clicked; timing begins.
    Started,
    /// A later node was clicked; the user should travel to it.
    Advanced { travel_to: NodeId },
}

/// Highlight progression along a follow-path task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FopProgress {
    pub path: Vec<NodeId>,
    /// Index of the highlighted node; equals `path.len()` once the end node
    /// has been clicked.
    pub highlighted: usize,
    pub complete: bool,
}

impl FopProgress {
    pub fn new(path: Vec<NodeId>) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::Parameter("follow path needs at least two nodes".into()));
        }
        Ok(Self {
            path,
            highlighted: 0,
            complete: false,
        })
    }

    pub fn highlighted_node(&self) -> Option<NodeId> {
        self.path.get(self.highlighted).copied()
    }

    pub fn started(&self) -> bool {
        self.highlighted > 0
    }

    pub fn end_node(&self) -> NodeId {
        *self.path.last().expect("non-empty path")
    }

    pub fn click(&mut self, node: NodeId) -> FopEvent {
        if self.complete || self.highlighted_node() != Some(node) {
            return FopEvent::Ignored;
        }
        self.highlighted += 1;
        if self.highlighted == 1 {
            FopEvent::Started
        } else {
            FopEvent::Advanced { travel_to: node }
        }
    }

    /// Reports that the user reached `node`. Returns `true` when this
    /// completes the task.
    pub fn arrived(&mut self, node: NodeId) -> bool {
        if !self.complete && self.highlighted == self.path.len() && node == self.end_node() {
            self.complete = true;
            return true;
        }
        false
    }
}

/// Scored outcome of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TaskResult {
    pub kind: Option<TaskKind>,
    pub completion_time: f64,
    #[serde(default)]
    pub selected_nodes: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_estimate: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_path: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<Ray>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correctness_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miss_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positive_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judgement_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_correct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deviation_degrees: Option<f64>,
}

impl TaskResult {
    pub fn new(kind: TaskKind, completion_time: f64) -> Self {
        Self {
            kind: Some(kind),
            completion_time,
            ..Self::default()
        }
    }

    pub fn with_fcn(mut self, selected: &BTreeSet<NodeId>, s: FcnScore) -> Self {
        self.selected_nodes = selected.iter().copied().collect();
        self.correctness_rate = Some(s.correctness_rate);
        self.miss_rate = Some(s.miss_rate);
        self.false_positive_rate = Some(s.false_positive_rate);
        self
    }

    pub fn with_end(mut self, estimate: i64, s: EndScore) -> Self {
        self.reported_estimate = Some(estimate);
        self.judgement_error = Some(s.judgement_error);
        self.signed_error = Some(s.signed_error);
        self
    }

    pub fn with_fip(mut self, reported: Vec<NodeId>, s: FipScore) -> Self {
        self.reported_path = Some(reported);
        self.path_correct = Some(s.path_correct);
        self.path_deviation = s.path_deviation;
        self
    }

    pub fn with_orientation(mut self, ray: Ray, degrees: f64) -> Self {
        self.ray = Some(ray);
        self.angle_deviation_degrees = Some(degrees);
        self
    }

    /// Named numeric measures of this result, in a fixed order.
    pub fn measures(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if self.kind.is_some_and(TaskKind::has_timed_measure) {
            out.push(("completion_time", self.completion_time));
        }
        let opt = [
            ("correctness_rate", self.correctness_rate),
            ("miss_rate", self.miss_rate),
            ("false_positive_rate", self.false_positive_rate),
            ("judgement_error", self.judgement_error),
            ("signed_error", self.signed_error),
            ("path_correct", self.path_correct.map(|c| if c { 1.0 } else { 0.0 })),
            ("path_deviation", self.path_deviation),
            ("angle_deviation_degrees", self.angle_deviation_degrees),
        ];
        out.extend(opt.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
        out
    }
}
