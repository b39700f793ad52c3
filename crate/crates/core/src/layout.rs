//! Deterministic 3D force-directed layout.
//!
//! A spring-electrical model with velocity Verlet-style damping and an
//! exponential cooling schedule, modelled on the d3-force-3d simulation:
//!
//! * springs pull every edge toward `link_distance`, each endpoint moving in
//!   inverse proportion to its degree;
//! * every node repels every other node with a force of magnitude
//!   `|repulsion_strength| * alpha / distance`, approximated with a
//!   Barnes–Hut octree (opening criterion `cell width / distance < theta`);
//! * a centering force shifts the whole system toward the origin.
//!
//! The simulation is a fixed-step integration with no wall-clock input, so a
//! `(graph, params)` pair always yields the same positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math::{centroid, Vec3};

type Mat3 = nalgebra::Matrix3<f64>;

const INITIAL_RADIUS: f64 = 10.0;
const MAX_TREE_DEPTH: usize = 48;
const JITTER: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub link_distance: f64,
    /// Multiplier on the per-edge default strength `1 / min(deg(a), deg(b))`.
    pub link_strength: f64,
    /// Negative values repel.
    pub repulsion_strength: f64,
    pub center_strength: f64,
    pub theta: f64,
    /// Squared distances below `distance_min^2` are softened.
    pub distance_min: f64,
    pub alpha_start: f64,
    pub alpha_min: f64,
    pub alpha_decay: f64,
    pub alpha_target: f64,
    pub velocity_decay: f64,
    pub max_iterations: usize,
    pub initial_jitter: f64,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            link_distance: 30.0,
            link_strength: 1.0,
            repulsion_strength: -30.0,
            center_strength: 1.0,
            theta: 0.9,
            distance_min: 1.0,
            alpha_start: 1.0,
            alpha_min: 0.001,
            alpha_decay: 0.0228,
            alpha_target: 0.0,
            velocity_decay: 0.4,
            max_iterations: 1000,
            initial_jitter: 0.5,
            seed: 0,
        }
    }
}

impl LayoutParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parameter(msg.to_string()));
        if !(0.0 < self.alpha_min && self.alpha_min < self.alpha_start && self.alpha_start <= 1.0) {
            return bad("require 0 < alpha_min < alpha_start <= 1");
        }
        if !(0.0 < self.alpha_decay && self.alpha_decay < 1.0) {
            return bad("require 0 < alpha_decay < 1");
        }
        if !(0.0..1.0).contains(&self.velocity_decay) {
            return bad("require 0 <= velocity_decay < 1");
        }
        if !(self.alpha_target >= 0.0 && self.alpha_target < self.alpha_min) {
            return bad("require 0 <= alpha_target < alpha_min");
        }
        if self.link_distance <= 0.0 || self.theta < 0.0 || self.distance_min <= 0.0 {
            return bad("link_distance and distance_min must be positive, theta non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutState {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub alpha: f64,
    pub tick: u64,
}

impl LayoutState {
    pub fn is_finite(&self) -> bool {
        self.positions
            .iter()
            .chain(&self.velocities)
            .all(|p| p.iter().all(|c| c.is_finite()))
    }
}

/// Places nodes on a 3D phyllotaxis spiral whose radius grows with the cube
/// root of the node index, plus a small seeded jitter.
pub fn init_layout(g: &Graph, params: &LayoutParams) -> LayoutState {
    let roll_step = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let yaw_step = std::f64::consts::PI * 20.0 / (9.0 + 221f64.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let positions = g
        .nodes()
        .map(|i| {
            let fi = i as f64;
            let radius = INITIAL_RADIUS * (0.5 + fi).cbrt();
            let roll = fi * roll_step;
            let yaw = fi * yaw_step;
            let base = Vec3::new(
                radius * roll.cos(),
                radius * roll.sin() * yaw.cos(),
                radius * roll.sin() * yaw.sin(),
            );
            let jitter = Vec3::from_fn(|_, _| rng.gen_range(-0.5..0.5) * params.initial_jitter);
            base + jitter
        })
        .collect();
    LayoutState {
        positions,
        velocities: vec![Vec3::zeros(); g.node_count()],
        alpha: params.alpha_start,
        tick: 0,
    }
}

/// Seeded source of the tiny offsets used when two bodies coincide.
struct Jiggle(ChaCha8Rng);

impl Jiggle {
    fn new(seed: u64, tick: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(
            seed ^ tick.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        ))
    }

    fn vector(&mut self) -> Vec3 {
        Vec3::from_fn(|_, _| (self.0.gen::<f64>() - 0.5) * JITTER)
    }

    fn fix(&mut self, v: &mut Vec3) {
        for c in v.iter_mut() {
            if *c == 0.0 {
                *c = (self.0.gen::<f64>() - 0.5) * JITTER;
            }
        }
    }
}

/// Advances the simulation by one tick.
pub fn layout_step(state: &LayoutState, g: &Graph, params: &LayoutParams) -> LayoutState {
    let mut next = state.clone();
    let alpha = state.alpha;
    let mut jiggle = Jiggle::new(params.seed, state.tick);

    apply_links(&mut next, g, params, alpha, &mut jiggle);

    let repulsion = many_body_forces(&next.positions, params, alpha, &mut jiggle);
    for (v, f) in next.velocities.iter_mut().zip(&repulsion) {
        *v += f;
    }

    if params.center_strength != 0.0 && !next.positions.is_empty() {
        let shift = centroid(&next.positions) * params.center_strength;
        for p in &mut next.positions {
            *p -= shift;
        }
    }

    let keep = 1.0 - params.velocity_decay;
    for (p, v) in next.positions.iter_mut().zip(&mut next.velocities) {
        *v *= keep;
        *p += *v;
    }

    next.alpha += (params.alpha_target - next.alpha) * params.alpha_decay;
    next.tick += 1;
    next
}

fn apply_links(state: &mut LayoutState, g: &Graph, params: &LayoutParams, alpha: f64, jiggle: &mut Jiggle) {
    for &(s, t) in g.edges() {
        let ds = g.degree(s).unwrap_or(1) as f64;
        let dt = g.degree(t).unwrap_or(1) as f64;
        let strength = params.link_strength / ds.min(dt);
        let bias = ds / (ds + dt);

        let mut delta = (state.positions[t] + state.velocities[t]) - (state.positions[s] + state.velocities[s]);
        jiggle.fix(&mut delta);
        let len = delta.norm();
        let k = (len - params.link_distance) / len * alpha * strength;
        let pull = delta * k;
        state.velocities[t] -= pull * bias;
        state.velocities[s] += pull * (1.0 - bias);
    }
}

/// Central multipole moments of a set of unit bodies about their mass
/// center: count, center, second moment `sum x x^T` and third moment
/// `sum x_a x_b x_c`, with `x` measured from the center.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    center: Vec3,
    second: Mat3,
    third: [f64; 27],
}

impl Moments {
    fn empty() -> Self {
        Self {
            count: 0,
            center: Vec3::zeros(),
            second: Mat3::zeros(),
            third: [0.0; 27],
        }
    }

    fn of_points(points: impl Iterator<Item = Vec3> + Clone) -> Self {
        let count = points.clone().count();
        if count == 0 {
            return Self::empty();
        }
        let center = points.clone().sum::<Vec3>() / count as f64;
        let mut m = Self {
            count,
            center,
            ..Self::empty()
        };
        for p in points {
            let x = p - center;
            m.second += x * x.transpose();
            for (idx, t) in m.third.iter_mut().enumerate() {
                *t += x[idx / 9] * x[(idx / 3) % 3] * x[idx % 3];
            }
        }
        m
    }

    /// Merges child moments with parallel-axis shifts to the joint center.
    fn combine(parts: &[Moments]) -> Self {
        let count: usize = parts.iter().map(|p| p.count).sum();
        if count == 0 {
            return Self::empty();
        }
        let center = parts.iter().map(|p| p.center * p.count as f64).sum::<Vec3>() / count as f64;
        let mut m = Self {
            count,
            center,
            ..Self::empty()
        };
        for p in parts.iter().filter(|p| p.count > 0) {
            let e = p.center - center;
            let n = p.count as f64;
            m.second += p.second + e * e.transpose() * n;
            for (idx, t) in m.third.iter_mut().enumerate() {
                let (a, b, c) = (idx / 9, (idx / 3) % 3, idx % 3);
                *t += p.third[idx]
                    + p.second[(a, b)] * e[c]
                    + p.second[(a, c)] * e[b]
                    + p.second[(b, c)] * e[a]
                    + n * e[a] * e[b] * e[c];
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
struct Cell {
    center: Vec3,
    half: f64,
    moments: Moments,
    children: [u32; 8],
    points: Vec<usize>,
}

impl Cell {
    fn new(center: Vec3, half: f64) -> Self {
        Self {
            center,
            half,
            moments: Moments::empty(),
            children: [0; 8],
            points: Vec::new(),
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.iter().all(|&c| c == 0)
    }
}

/// Arena-allocated octree. Index 0 is the root, so `0` in `children` means
/// "no child".
struct Octree<'a> {
    cells: Vec<Cell>,
    positions: &'a [Vec3],
}

impl<'a> Octree<'a> {
    fn build(positions: &'a [Vec3]) -> Self {
        let (mut lo, mut hi) = (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
        for p in positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let center = (lo + hi) * 0.5;
        let half = ((hi - lo).max() * 0.5).max(1e-9);
        let mut tree = Self {
            cells: vec![Cell::new(center, half)],
            positions,
        };
        for i in 0..positions.len() {
            tree.insert(0, i, 0);
        }
        tree.summarize(0);
        tree
    }

    fn octant(center: &Vec3, p: &Vec3) -> usize {
        (usize::from(p.x >= center.x)) | (usize::from(p.y >= center.y) << 1) | (usize::from(p.z >= center.z) << 2)
    }

    fn child(&mut self, cell: usize, octant: usize) -> usize {
        let existing = self.cells[cell].children[octant];
        if existing != 0 {
            return existing as usize;
        }
        let parent = &self.cells[cell];
        let half = parent.half * 0.5;
        let offset = Vec3::new(
            if octant & 1 != 0 { half } else { -half },
            if octant & 2 != 0 { half } else { -half },
            if octant & 4 != 0 { half } else { -half },
        );
        let c = Cell::new(parent.center + offset, half);
        self.cells.push(c);
        let idx = self.cells.len() - 1;
        self.cells[cell].children[octant] = idx as u32;
        idx
    }

    fn insert(&mut self, cell: usize, point: usize, depth: usize) {
        if self.cells[cell].is_leaf() {
            let coincident = self.cells[cell]
                .points
                .first()
                .is_some_and(|&q| self.positions[q] == self.positions[point]);
            if self.cells[cell].points.is_empty() || coincident || depth >= MAX_TREE_DEPTH {
                self.cells[cell].points.push(point);
                return;
            }
            let moved = std::mem::take(&mut self.cells[cell].points);
            for q in moved {
                self.descend(cell, q, depth);
            }
        }
        self.descend(cell, point, depth);
    }

    fn descend(&mut self, cell: usize, point: usize, depth: usize) {
        let o = Self::octant(&self.cells[cell].center, &self.positions[point]);
        let child = self.child(cell, o);
        self.insert(child, point, depth + 1);
    }

    fn summarize(&mut self, cell: usize) {
        let moments = if self.cells[cell].is_leaf() {
            let positions = self.positions;
            Moments::of_points(self.cells[cell].points.iter().map(|&i| positions[i]))
        } else {
            let children: Vec<usize> = self.cells[cell]
                .children
                .iter()
                .filter(|&&c| c != 0)
                .map(|&c| c as usize)
                .collect();
            for &c in &children {
                self.summarize(c);
            }
            let parts: Vec<Moments> = children.iter().map(|&c| self.cells[c].moments.clone()).collect();
            Moments::combine(&parts)
        };
        self.cells[cell].moments = moments;
    }
}

/// Pairwise repulsion contribution on a body at `from` by mass at `to`.
fn pair_force(delta: Vec3, strength: f64, distance_min2: f64) -> Vec3 {
    let mut l2 = delta.norm_squared();
    if l2 < distance_min2 {
        l2 = (distance_min2 * l2).sqrt();
    }
    delta * (strength / l2)
}

/// Far-field increment from a cell: the kernel `K(d) = d / |d|^2` expanded
/// about the cell's mass center up to third order (the first-order term
/// vanishes about the mass center).
fn cell_force(delta: Vec3, m: &Moments, strength: f64, distance_min2: f64) -> Vec3 {
    let s = delta.norm_squared();
    if s < distance_min2 {
        return pair_force(delta, strength * m.count as f64, distance_min2);
    }
    let s2 = s * s;
    let s3 = s2 * s;

    let md = m.second * delta;
    let dmd = delta.dot(&md);
    let quad = (-2.0 * md - m.second.trace() * delta) / s2 + delta * (4.0 * dmd / s3);

    // t_a = O_abb, u_a = O_abc d_b d_c, w = O_abc d_a d_b d_c
    let mut t = Vec3::zeros();
    let mut u = Vec3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            t[a] += m.third[a * 9 + b * 3 + b];
            for c in 0..3 {
                u[a] += m.third[a * 9 + b * 3 + c] * delta[b] * delta[c];
            }
        }
    }
    let w = delta.dot(&u);
    let oct = -t / s2 + (u + delta * t.dot(&delta)) * (4.0 / s3) - delta * (8.0 * w / (s3 * s));

    (delta * (m.count as f64 / s) + quad + oct) * strength
}

/// Barnes–Hut many-body velocity increments for one tick at cooling `alpha`.
pub fn barnes_hut_forces(positions: &[Vec3], params: &LayoutParams, alpha: f64) -> Vec<Vec3> {
    let mut jiggle = Jiggle::new(params.seed, u64::MAX);
    many_body_forces(positions, params, alpha, &mut jiggle)
}

fn many_body_forces(positions: &[Vec3], params: &LayoutParams, alpha: f64, jiggle: &mut Jiggle) -> Vec<Vec3> {
    if positions.len() < 2 || params.repulsion_strength == 0.0 {
        return vec![Vec3::zeros(); positions.len()];
    }
    let tree = Octree::build(positions);
    let strength = params.repulsion_strength * alpha;
    let dmin2 = params.distance_min * params.distance_min;
    let theta2 = params.theta * params.theta;

    let mut out = Vec::with_capacity(positions.len());
    let mut stack = Vec::new();
    for (i, p) in positions.iter().enumerate() {
        let mut force = Vec3::zeros();
        stack.clear();
        stack.push(0usize);
        while let Some(ci) = stack.pop() {
            let cell = &tree.cells[ci];
            if cell.moments.count == 0 {
                continue;
            }
            if cell.is_leaf() {
                for &j in &cell.points {
                    if j == i {
                        continue;
                    }
                    let mut delta = positions[j] - p;
                    if delta == Vec3::zeros() {
                        delta = jiggle.vector();
                    }
                    force += pair_force(delta, strength, dmin2);
                }
                continue;
            }
            let delta = cell.moments.center - p;
            let width = 2.0 * cell.half;
            if width * width / theta2 < delta.norm_squared() {
                force += cell_force(delta, &cell.moments, strength, dmin2);
            } else {
                stack.extend(cell.children.iter().filter(|&&c| c != 0).map(|&c| c as usize));
            }
        }
        out.push(force);
    }
    out
}

/// Runs the simulation to `alpha <= alpha_min` (or `max_iterations`) and
/// returns positions re-centered on the origin.
pub fn run_layout(g: &Graph, params: &LayoutParams) -> Result<Vec<Vec3>> {
    params.validate()?;
    let mut state = init_layout(g, params);
    let mut steps = 0;
    while state.alpha > params.alpha_min && steps < params.max_iterations {
        state = layout_step(&state, g, params);
        steps += 1;
    }
    let c = centroid(&state.positions);
    Ok(state.positions.iter().map(|p| p - c).collect())
}
