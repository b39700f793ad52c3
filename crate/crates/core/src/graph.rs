//! Undirected graphs, scale-free generation and the topological queries that
//! provide ground truth for every task.
//!
//! Generation follows the classic preferential-attachment growth process: the
//! process starts from `m` isolated seed nodes, the first new node attaches to
//! all of them, and every later node attaches to `m` distinct existing nodes
//! drawn with probability proportional to their current degree. This seeding
//! convention yields exactly `m * (n - m)` edges (326 edges for 165 nodes and
//! 826 edges for 415 nodes at `m = 2`).
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with
//! [`SeedableRng::seed_from_u64`], so a `(n, m, seed)` triple reproduces the
//! same graph on every platform.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Undirected edge stored as `(min, max)`.
pub type Edge = (NodeId, NodeId);

/// Number of distinct labels of the form `[A-Z]{2}[1-9][0-9]?`.
pub const LABEL_CAPACITY: usize = 26 * 26 * 99;

/// Salt mixed into the seed for the label stream, so labels and topology draw
/// from independent streams.
const LABEL_STREAM: u64 = 0x6c61_6265_6c73_0001;

pub fn normalize_edge(a: NodeId, b: NodeId) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self { n, m, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Parameter(format!("m must be >= 1, got {}", self.m)));
        }
        if self.n <= self.m {
            return Err(Error::Parameter(format!(
                "n must exceed m (n = {}, m = {})",
                self.n, self.m
            )));
        }
        Ok(())
    }
}

/// Immutable undirected graph with dense node ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<NodeId>>,
    origin: Option<GeneratorParams>,
}

impl Graph {
    /// Builds a graph from an edge list. Nodes get placeholder labels `N<id>`.
    ///
    /// Rejects self-loops, duplicate edges and out-of-range endpoints.
    /// Connectivity is not required here; generated graphs are always
    /// connected and [`Graph::is_connected`] reports it for the rest.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b) in edges {
            if a >= n {
                return Err(Error::UnknownNode(a));
            }
            if b >= n {
                return Err(Error::UnknownNode(b));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            list.push(normalize_edge(a, b));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(Self {
            labels: (0..n).map(|i| format!("N{i}")).collect(),
            edges: list,
            adjacency,
            origin: None,
        })
    }

    /// Replaces the node labels. Labels must be unique and one per node.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::SizeMismatch(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidGraph("labels are not unique".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// Edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Generator parameters, if the graph came out of [`generate_ba`].
    pub fn origin(&self) -> Option<GeneratorParams> {
        self.origin
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    pub fn label(&self, v: NodeId) -> Result<&str> {
        self.check(v)?;
        Ok(&self.labels[v])
    }

    pub fn find_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: NodeId) -> Result<&[NodeId]> {
        self.check(v)?;
        Ok(&self.adjacency[v])
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.neighbors(v).map(<[NodeId]>::len)
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.contains(b) && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Incident edges of `v` in `(min, max)` form.
    pub fn incident_edges(&self, v: NodeId) -> Result<Vec<Edge>> {
        Ok(self.neighbors(v)?.iter().map(|&w| normalize_edge(v, w)).collect())
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Nodes adjacent to both `u` and `v`, ascending.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>> {
        let a = self.neighbors(u)?;
        let b = self.neighbors(v)?;
        if u == v {
            return Err(Error::Parameter("common neighbors need two distinct nodes".into()));
        }
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if a[i] != u && a[i] != v {
                        out.push(a[i]);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(out)
    }

    /// Breadth-first hop counts from `source`; `None` for unreachable nodes.
    pub fn geodesic_distances(&self, source: NodeId) -> Result<Vec<Option<usize>>> {
        self.check(source)?;
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(cur) = queue.pop_front() {
            let next = dist[cur].map(|d| d + 1);
            for &w in &self.adjacency[cur] {
                if dist[w].is_none() {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    /// Shortest path from `u` to `v`, endpoints included.
    ///
    /// Among all shortest paths the lexicographically smallest id sequence is
    /// returned: distances are computed from `v`, then the walk from `u`
    /// always steps to the smallest neighbor one hop closer to `v`.
    pub fn shortest_path(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>> {
        self.check(u)?;
        let to_v = self.geodesic_distances(v)?;
        let Some(mut remaining) = to_v[u] else {
            return Err(Error::Disconnected(u, v));
        };
        let mut path = Vec::with_capacity(remaining + 1);
        let mut cur = u;
        path.push(cur);
        while remaining > 0 {
            cur = *self.adjacency[cur]
                .iter()
                .find(|&&w| to_v[w] == Some(remaining - 1))
                .expect("BFS layers are consistent");
            path.push(cur);
            remaining -= 1;
        }
        Ok(path)
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count() == 0 {
            return true;
        }
        self.geodesic_distances(0)
            .map(|d| d.iter().all(Option::is_some))
            .unwrap_or(false)
    }

    /// Length of the longest shortest path, by all-pairs BFS.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for s in self.nodes() {
            for (t, d) in self.geodesic_distances(s)?.into_iter().enumerate() {
                match d {
                    Some(d) => best = best.max(d),
                    None => return Err(Error::Disconnected(s, t)),
                }
            }
        }
        Ok(best)
    }

    pub fn to_file(&self) -> GraphFile {
        let (m, seed) = self.origin.map(|p| (p.m, p.seed)).unwrap_or((0, 0));
        GraphFile {
            n: self.node_count(),
            m,
            seed,
            labels: self.labels.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        let mut g = Self::from_edges(file.n, file.edges.iter().map(|e| (e[0], e[1])))?
            .with_labels(file.labels.clone())?;
        if file.m > 0 {
            g.origin = Some(GeneratorParams::new(file.n, file.m, file.seed));
        }
        Ok(g)
    }
}

/// On-disk graph representation. Edges are `(min, max)`-ordered and sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub labels: Vec<String>,
    pub edges: Vec<[NodeId; 2]>,
}

/// Preferential-attachment generator seeded with `m` isolated nodes.
///
/// The resulting graph has exactly `m * (n - m)` edges, is connected, and is
/// labelled with [`assign_labels`] using the same seed.
pub fn generate_ba(params: GeneratorParams) -> Result<Graph> {
    params.validate()?;
    let GeneratorParams { n, m, seed } = params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut edges = Vec::with_capacity(m * (n - m));
    // Every node appears here once per incident edge, so uniform draws from
    // this pool are degree-proportional.
    let mut pool: Vec<NodeId> = Vec::with_capacity(2 * m * (n - m));
    let mut targets: Vec<NodeId> = (0..m).collect();
    for source in m..n {
        edges.extend(targets.iter().map(|&t| (t, source)));
        pool.extend_from_slice(&targets);
        pool.extend(std::iter::repeat_n(source, m));
        if source + 1 < n {
            let mut chosen = BTreeSet::new();
            while chosen.len() < m {
                chosen.insert(pool[rng.gen_range(0..pool.len())]);
            }
            targets = chosen.into_iter().collect();
        }
    }

    let mut g = Graph::from_edges(n, edges)?;
    g.origin = Some(params);
    assign_labels(g, seed)
}

/// Gives every node a unique label of two uppercase letters followed by a
/// number in `1..=99`, sampled without replacement.
pub fn assign_labels(g: Graph, seed: u64) -> Result<Graph> {
    let n = g.node_count();
    if n > LABEL_CAPACITY {
        return Err(Error::LabelCapacity {
            requested: n,
            capacity: LABEL_CAPACITY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ LABEL_STREAM);
    let labels = index::sample(&mut rng, LABEL_CAPACITY, n)
        .into_iter()
        .map(label_for_index)
        .collect();
    g.with_labels(labels)
}

fn label_for_index(i: usize) -> String {
    let number = i % 99 + 1;
    let letters = i / 99;
    let first = (b'A' + (letters / 26) as u8) as char;
    let second = (b'A' + (letters % 26) as u8) as char;
    format!("{first}{second}{number}")
}
