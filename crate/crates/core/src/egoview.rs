//! Per-condition view derivation.
//!
//! * `Baseline` leaves the layout untouched.
//! * `EgoHighlight` marks the user node's neighbors and hides the edges
//!   incident to the user node.
//! * `EgoBubble` additionally moves every neighbor onto a Fibonacci sphere
//!   around the user node and clips all visible edges against that sphere.
//!
//! Every derivation is a pure function of the graph, the base layout and the
//! user node. Only neighbors of the user node are ever displaced.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize_edge, Edge, Graph, NodeId};
use crate::math::{angle_between, median, Vec3};
use crate::navigation::{blend, ease};

pub const MIN_BUBBLE_RADIUS: f64 = 2.0;
pub const MAX_BUBBLE_RADIUS: f64 = 10.0;

/// Sub-segments shorter than this fraction of the original edge are dropped.
const MIN_PIECE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewCondition {
    Baseline,
    #[serde(rename = "highlight")]
    EgoHighlight,
    #[serde(rename = "bubble")]
    EgoBubble,
}

impl ViewCondition {
    pub const ALL: [ViewCondition; 3] = [Self::Baseline, Self::EgoHighlight, Self::EgoBubble];

    pub fn is_egocentric(self) -> bool {
        !matches!(self, Self::Baseline)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::EgoHighlight => "highlight",
            Self::EgoBubble => "bubble",
        }
    }
}

impl std::fmt::Display for ViewCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ViewCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Self::Baseline),
            "highlight" => Ok(Self::EgoHighlight),
            "bubble" => Ok(Self::EgoBubble),
            other => Err(Error::Parameter(format!("unknown condition '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment(pub Vec3, pub Vec3);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "wire::EgoViewWire", try_from = "wire::EgoViewWire")]
pub struct EgoViewState {
    pub condition: ViewCondition,
    pub user_node: Option<NodeId>,
    pub highlight_set: BTreeSet<NodeId>,
    pub hidden_edges: BTreeSet<Edge>,
    pub displaced_positions: BTreeMap<NodeId, Vec3>,
    pub clipped_edges: BTreeMap<Edge, Vec<Segment>>,
    pub bubble_radius: f64,
}

impl EgoViewState {
    /// View with no adaptations (Baseline, or any condition seen from the
    /// overview where no user node exists).
    pub fn plain(condition: ViewCondition) -> Self {
        Self {
            condition,
            user_node: None,
            highlight_set: BTreeSet::new(),
            hidden_edges: BTreeSet::new(),
            displaced_positions: BTreeMap::new(),
            clipped_edges: BTreeMap::new(),
            bubble_radius: 0.0,
        }
    }

    pub fn position_of(&self, v: NodeId, base: &[Vec3]) -> Vec3 {
        self.displaced_positions.get(&v).copied().unwrap_or(base[v])
    }

    /// Position of every node under this view.
    pub fn effective_positions(&self, base: &[Vec3]) -> Vec<Vec3> {
        let mut out = base.to_vec();
        for (&v, &p) in &self.displaced_positions {
            out[v] = p;
        }
        out
    }

    pub fn has_adaptations(&self) -> bool {
        !(self.highlight_set.is_empty()
            && self.hidden_edges.is_empty()
            && self.displaced_positions.is_empty()
            && self.clipped_edges.is_empty())
    }
}

/// Half the median length of the user node's edges, clamped to
/// `[MIN_BUBBLE_RADIUS, MAX_BUBBLE_RADIUS]`.
pub fn default_bubble_radius(g: &Graph, positions: &[Vec3], user: NodeId) -> Result<f64> {
    let mut lengths: Vec<f64> = g
        .neighbors(user)?
        .iter()
        .map(|&w| (positions[w] - positions[user]).norm())
        .collect();
    let radius = median(&mut lengths).map_or(MIN_BUBBLE_RADIUS, |m| 0.5 * m);
    Ok(radius.clamp(MIN_BUBBLE_RADIUS, MAX_BUBBLE_RADIUS))
}

/// Derives the view state for `condition` with the user at `user_node`.
///
/// `bubble_radius` of `None` selects [`default_bubble_radius`]. The user
/// node is ignored for Baseline and required otherwise.
pub fn apply_condition(
    g: &Graph,
    positions: &[Vec3],
    condition: ViewCondition,
    user_node: Option<NodeId>,
    bubble_radius: Option<f64>,
) -> Result<EgoViewState> {
    if positions.len() != g.node_count() {
        return Err(Error::SizeMismatch(format!(
            "{} positions for {} nodes",
            positions.len(),
            g.node_count()
        )));
    }
    if condition == ViewCondition::Baseline {
        return Ok(EgoViewState::plain(condition));
    }
    let user = user_node.ok_or_else(|| Error::Parameter(format!("{condition} needs a user node")))?;
    let neighbors = g.neighbors(user)?;

    let mut state = EgoViewState::plain(condition);
    state.user_node = Some(user);
    state.highlight_set = neighbors.iter().copied().collect();
    state.hidden_edges = neighbors.iter().map(|&w| normalize_edge(user, w)).collect();
    if condition == ViewCondition::EgoHighlight {
        return Ok(state);
    }

    let radius = match bubble_radius {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(Error::Parameter(format!("bubble radius must be positive, got {r}"))),
        None => default_bubble_radius(g, positions, user)?,
    };
    state.bubble_radius = radius;
    let center = positions[user];

    if !neighbors.is_empty() {
        let slots = fibonacci_sphere(neighbors.len(), radius, center)?;
        let originals: BTreeMap<NodeId, Vec3> = neighbors.iter().map(|&w| (w, positions[w])).collect();
        let assignment = assign_bubble_slots(&originals, &center, &slots)?;
        state.displaced_positions = assignment.into_iter().map(|(w, slot)| (w, slots[slot])).collect();
    }

    for &edge in g.edges() {
        if state.hidden_edges.contains(&edge) {
            continue;
        }
        let a = state.position_of(edge.0, positions);
        let b = state.position_of(edge.1, positions);
        let pieces = clip_edge_to_sphere(&a, &b, &center, radius);
        if pieces != [Segment(a, b)] {
            state.clipped_edges.insert(edge, pieces);
        }
    }
    Ok(state)
}

/// `k` points on a sphere following the golden-angle spiral: point `i` sits
/// at height `1 - 2(i + 0.5)/k` and azimuth `i * pi * (3 - sqrt 5)`.
pub fn fibonacci_sphere(k: usize, radius: f64, center: Vec3) -> Result<Vec<Vec3>> {
    if k == 0 {
        return Err(Error::Parameter("fibonacci sphere needs at least one point".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    Ok((0..k)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
            let ring = (1.0 - y * y).max(0.0).sqrt();
            let phi = i as f64 * golden;
            let unit = Vec3::new(ring * phi.cos(), y, ring * phi.sin());
            center + unit.normalize() * radius
        })
        .collect())
}

/// Greedy nearest-direction assignment of neighbors to sphere slots.
///
/// Neighbors are visited in ascending id; each takes the unused slot whose
/// direction from `user_pos` is angularly closest to its original direction
/// (ties go to the lower slot index). Returns neighbor -> slot index.
pub fn assign_bubble_slots(
    neighbor_positions: &BTreeMap<NodeId, Vec3>,
    user_pos: &Vec3,
    slots: &[Vec3],
) -> Result<BTreeMap<NodeId, usize>> {
    if neighbor_positions.len() != slots.len() {
        return Err(Error::SizeMismatch(format!(
            "{} neighbors for {} slots",
            neighbor_positions.len(),
            slots.len()
        )));
    }
    let mut used = vec![false; slots.len()];
    let mut out = BTreeMap::new();
    for (&node, pos) in neighbor_positions {
        let dir = pos - user_pos;
        let mut best: Option<(f64, usize)> = None;
        for (j, slot) in slots.iter().enumerate() {
            if used[j] {
                continue;
            }
            let slot_dir = slot - user_pos;
            let angle = if dir.norm() == 0.0 || slot_dir.norm() == 0.0 {
                0.0
            } else {
                angle_between(&dir, &slot_dir)
            };
            if best.is_none_or(|(a, _)| angle < a) {
                best = Some((angle, j));
            }
        }
        let (_, j) = best.expect("slot count matches neighbor count");
        used[j] = true;
        out.insert(node, j);
    }
    Ok(out)
}

/// Portions of the segment `p0..p1` that lie outside the sphere.
///
/// Returns the whole segment when it never enters the sphere, one piece when
/// an endpoint is inside, two pieces when the segment passes through, and
/// nothing when both endpoints are inside.
pub fn clip_edge_to_sphere(p0: &Vec3, p1: &Vec3, center: &Vec3, r: f64) -> Vec<Segment> {
    let d = p1 - p0;
    let f = p0 - center;
    let a = d.norm_squared();
    let c = f.norm_squared() - r * r;
    if a == 0.0 {
        return if c < 0.0 { vec![] } else { vec![Segment(*p0, *p1)] };
    }
    let b = 2.0 * f.dot(&d);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return vec![Segment(*p0, *p1)];
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = -0.5 * (b + b.signum() * sq);
    let (mut t1, mut t2) = if q == 0.0 {
        (-sq / (2.0 * a), sq / (2.0 * a))
    } else {
        (q / a, c / q)
    };
    if t1 > t2 {
        std::mem::swap(&mut t1, &mut t2);
    }
    if t1 >= 1.0 || t2 <= 0.0 {
        return vec![Segment(*p0, *p1)];
    }
    let at = |t: f64| p0 + d * t;
    let mut out = Vec::with_capacity(2);
    if t1 > MIN_PIECE {
        out.push(Segment(*p0, at(t1)));
    }
    if t2 < 1.0 - MIN_PIECE {
        out.push(Segment(at(t2), *p1));
    }
    out
}

/// Effective positions while morphing from one view to another, with eased
/// parameter `ease(t)`. Exact at `t = 0` and `t = 1`.
pub fn morph(from: &EgoViewState, to: &EgoViewState, base: &[Vec3], t: f64) -> Vec<Vec3> {
    let s = ease(t);
    (0..base.len())
        .map(|v| {
            let a = from.position_of(v, base);
            let b = to.position_of(v, base);
            if a == b {
                a
            } else {
                blend(&a, &b, s)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub fn to_rgb8(self) -> [u8; 3] {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }
}

/// Red for the nearest nodes (distance 0 or 1), ramping linearly to yellow
/// at `max_distance`.
pub fn geodesic_color(distance: usize, max_distance: usize) -> Rgb {
    let green = if max_distance <= 1 {
        0.0
    } else {
        ((distance as f64 - 1.0) / (max_distance as f64 - 1.0)).clamp(0.0, 1.0)
    };
    Rgb { r: 1.0, g: green, b: 0.0 }
}

/// 8-bit geodesic colors of every node relative to `user`. Unreachable
/// nodes get the far (yellow) end of the ramp.
pub fn geodesic_colors(g: &Graph, user: NodeId) -> Result<Vec<[u8; 3]>> {
    let dist = g.geodesic_distances(user)?;
    let max = dist.iter().flatten().copied().max().unwrap_or(0).max(1);
    Ok(dist
        .iter()
        .map(|d| geodesic_color(d.unwrap_or(max), max).to_rgb8())
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lowlight {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Edge>,
}

/// Everything outside the hovered node's direct neighborhood.
pub fn lowlight_set(g: &Graph, hovered: NodeId) -> Result<Lowlight> {
    let neighbors = g.neighbors(hovered)?;
    let keep: BTreeSet<NodeId> = neighbors.iter().copied().chain([hovered]).collect();
    Ok(Lowlight {
        nodes: g.nodes().filter(|v| !keep.contains(v)).collect(),
        edges: g
            .edges()
            .iter()
            .copied()
            .filter(|&(a, b)| a != hovered && b != hovered)
            .collect(),
    })
}

mod wire {
    use super::*;

    #[derive(Serialize, Deserialize)]
    pub struct Displaced {
        pub node: NodeId,
        pub position: Vec3,
    }

    #[derive(Serialize, Deserialize)]
    pub struct Clipped {
        pub edge: [NodeId; 2],
        pub segments: Vec<Segment>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct EgoViewWire {
        pub condition: ViewCondition,
        pub user_node: Option<NodeId>,
        pub highlight_set: Vec<NodeId>,
        pub hidden_edges: Vec<[NodeId; 2]>,
        pub displaced_positions: Vec<Displaced>,
        pub clipped_edges: Vec<Clipped>,
        pub bubble_radius: f64,
    }

    impl From<EgoViewState> for EgoViewWire {
        fn from(s: EgoViewState) -> Self {
            Self {
                condition: s.condition,
                user_node: s.user_node,
                highlight_set: s.highlight_set.into_iter().collect(),
                hidden_edges: s.hidden_edges.into_iter().map(|(a, b)| [a, b]).collect(),
                displaced_positions: s
                    .displaced_positions
                    .into_iter()
                    .map(|(node, position)| Displaced { node, position })
                    .collect(),
                clipped_edges: s
                    .clipped_edges
                    .into_iter()
                    .map(|((a, b), segments)| Clipped { edge: [a, b], segments })
                    .collect(),
                bubble_radius: s.bubble_radius,
            }
        }
    }

    impl TryFrom<EgoViewWire> for EgoViewState {
        type Error = String;

        fn try_from(w: EgoViewWire) -> std::result::Result<Self, String> {
            let edge = |e: [NodeId; 2]| {
                if e[0] == e[1] {
                    Err(format!("degenerate edge [{}, {}]", e[0], e[1]))
                } else {
                    Ok(normalize_edge(e[0], e[1]))
                }
            };
            Ok(Self {
                condition: w.condition,
                user_node: w.user_node,
                highlight_set: w.highlight_set.into_iter().collect(),
                hidden_edges: w.hidden_edges.into_iter().map(edge).collect::<std::result::Result<_, _>>()?,
                displaced_positions: w.displaced_positions.into_iter().map(|d| (d.node, d.position)).collect(),
                clipped_edges: w
                    .clipped_edges
                    .into_iter()
                    .map(|c| edge(c.edge).map(|e| (e, c.segments)))
                    .collect::<std::result::Result<_, _>>()?,
                bubble_radius: w.bubble_radius,
            })
        }
    }
}
