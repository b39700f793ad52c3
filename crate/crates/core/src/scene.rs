//! Scene files: a graph with its layout and navigation calibration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphFile, NodeId};
use crate::layout::{run_layout, LayoutParams};
use crate::math::Vec3;
use crate::navigation::{calibrate_fly_speed, overview_pose, path_length, Pose, SELECT_SECONDS};

/// Rendered node sphere radius in layout units.
pub const NODE_RADIUS: f64 = 1.5;
/// Hop length of the calibration path.
pub const REFERENCE_HOPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub max_fly_speed: f64,
    /// Fixed bubble radius; `None` derives it per user node.
    #[serde(default)]
    pub bubble_radius: Option<f64>,
    pub node_radius: f64,
    pub select_seconds: f64,
    pub reference_path: Vec<NodeId>,
    pub reference_path_length: f64,
}

impl Calibration {
    /// Distance from a node center within which a flying user has reached it.
    pub fn arrival_radius(&self) -> f64 {
        1.5 * self.node_radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub graph: GraphFile,
    pub positions: Vec<Vec3>,
    pub layout: LayoutParams,
    pub calibration: Calibration,
    pub overview: Pose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub graph: Graph,
    pub positions: Vec<Vec3>,
    pub layout: LayoutParams,
    pub calibration: Calibration,
    pub overview: Pose,
}

/// Median-length path among the canonical shortest paths between all pairs
/// at `REFERENCE_HOPS` hops (or the diameter, if smaller). Ties in length
/// resolve to the lexicographically smaller pair.
pub fn reference_path(g: &Graph, positions: &[Vec3]) -> Result<Vec<NodeId>> {
    let hops = REFERENCE_HOPS.min(g.diameter()?);
    if hops == 0 {
        return Err(Error::InvalidGraph("scene needs at least one edge".into()));
    }
    let mut candidates = Vec::new();
    for u in g.nodes() {
        let dist = g.geodesic_distances(u)?;
        for v in u + 1..g.node_count() {
            if dist[v] == Some(hops) {
                let path = g.shortest_path(u, v)?;
                candidates.push((path_length(&path, positions), path));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mid = (candidates.len() - 1) / 2;
    Ok(candidates.swap_remove(mid).1)
}

impl Scene {
    /// Lays out `graph` and calibrates navigation on the result.
    pub fn build(graph: Graph, layout: LayoutParams) -> Result<Self> {
        let positions = run_layout(&graph, &layout)?;
        Self::with_positions(graph, positions, layout)
    }

    pub fn with_positions(graph: Graph, positions: Vec<Vec3>, layout: LayoutParams) -> Result<Self> {
        if positions.len() != graph.node_count() {
            return Err(Error::SizeMismatch(format!(
                "{} positions for {} nodes",
                positions.len(),
                graph.node_count()
            )));
        }
        let path = reference_path(&graph, &positions)?;
        let calibration = Calibration {
            max_fly_speed: calibrate_fly_speed(&path, &positions)?,
            bubble_radius: None,
            node_radius: NODE_RADIUS,
            select_seconds: SELECT_SECONDS,
            reference_path_length: path_length(&path, &positions),
            reference_path: path,
        };
        let overview = overview_pose(&positions)?;
        Ok(Self { graph, positions, layout, calibration, overview })
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            graph: self.graph.to_file(),
            positions: self.positions.clone(),
            layout: self.layout.clone(),
            calibration: self.calibration.clone(),
            overview: self.overview,
        }
    }

    pub fn from_file(file: SceneFile) -> Result<Self> {
        let graph = Graph::from_file(&file.graph)?;
        if file.positions.len() != graph.node_count() {
            return Err(Error::SizeMismatch(format!(
                "{} positions for {} nodes",
                file.positions.len(),
                graph.node_count()
            )));
        }
        if !file.positions.iter().all(|p| p.iter().all(|c| c.is_finite())) {
            return Err(Error::Format("scene positions must be finite".into()));
        }
        let c = &file.calibration;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(c.max_fly_speed) && positive(c.node_radius) && c.select_seconds >= 0.0)
            || c.bubble_radius.is_some_and(|r| !positive(r))
        {
            return Err(Error::Format("scene calibration values must be positive".into()));
        }
        if c.reference_path.iter().any(|&v| !graph.contains(v)) {
            return Err(Error::Format("reference path names unknown nodes".into()));
        }
        file.layout.validate()?;
        Ok(Self {
            graph,
            positions: file.positions,
            layout: file.layout,
            calibration: file.calibration,
            overview: file.overview,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(read_json(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_file())
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
