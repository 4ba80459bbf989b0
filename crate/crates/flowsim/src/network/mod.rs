//! The static world: lane graph, lane geometry, signals and the navigation grid.

mod file;
mod grid;
mod light;
mod spline;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub use grid::{Cell, OccupancyGrid};
pub use light::{LightColor, Phase, TrafficLight};
pub use spline::{Nearest, Spline};

use crate::geom::Vec2;

/// Allowed relative mismatch between an edge's declared length and its lane arc length.
pub const LENGTH_TOLERANCE: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed network file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid spline: {0}")]
    Spline(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid traffic light: {0}")]
    Light(String),
    #[error("unknown node \"{0}\"")]
    UnknownNode(String),
    #[error("duplicate node \"{0}\"")]
    DuplicateNode(String),
    #[error("edge {index}: {reason}")]
    InvalidEdge { index: usize, reason: String },
    #[error("edge {index}: length {length} differs from lane arc length {arc_length} by more than 10%")]
    LengthMismatch { index: usize, length: f64, arc_length: f64 },
    #[error("arc length {s} outside [0, {length}]")]
    ArcLengthOutOfRange { s: f64, length: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub position: Vec2,
}

/// A directed lane between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Routing weight in meters.
    pub length: f64,
    /// m/s
    pub speed_limit: f64,
    pub spline: Spline,
}

/// Validated, immutable road network.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    index: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    lights: Vec<TrafficLight>,
    grid: OccupancyGrid,
}

impl RoadNetwork {
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        lights: Vec<TrafficLight>,
        grid: OccupancyGrid,
    ) -> Result<Self, NetworkError> {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
            if !n.position.is_finite() {
                return Err(NetworkError::InvalidEdge { index: i, reason: "non-finite node position".into() });
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if e.from >= nodes.len() || e.to >= nodes.len() {
                return Err(NetworkError::InvalidEdge { index: i, reason: "endpoint out of range".into() });
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(NetworkError::InvalidEdge {
                    index: i,
                    reason: format!("length must be positive, got {}", e.length),
                });
            }
            if !(e.speed_limit > 0.0 && e.speed_limit.is_finite()) {
                return Err(NetworkError::InvalidEdge {
                    index: i,
                    reason: format!("speed_limit must be positive, got {}", e.speed_limit),
                });
            }
            let arc = e.spline.length();
            if (e.length - arc).abs() > LENGTH_TOLERANCE * arc {
                return Err(NetworkError::LengthMismatch { index: i, length: e.length, arc_length: arc });
            }
        }
        for l in &lights {
            if l.controlled_edge >= edges.len() {
                return Err(NetworkError::Light(format!("controlled edge {} does not exist", l.controlled_edge)));
            }
        }
        Ok(RoadNetwork { nodes, index, edges, lights, grid })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let raw: file::NetworkFile = serde_json::from_str(text)?;
        raw.into_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&file::NetworkFile::from_network(self)).expect("network serializes")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn lights(&self) -> &[TrafficLight] {
        &self.lights
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Result<usize, NetworkError> {
        self.index.get(id).copied().ok_or_else(|| NetworkError::UnknownNode(id.to_owned()))
    }

    pub fn node_id(&self, index: usize) -> &str {
        &self.nodes[index].id
    }

    /// The lowest-weight edge from `from` to `to`, if any.
    pub fn edge_between(&self, from: usize, to: usize) -> Option<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == from && e.to == to)
            .min_by(|a, b| a.1.length.total_cmp(&b.1.length))
            .map(|(i, _)| i)
    }

    pub fn with_grid(mut self, grid: OccupancyGrid) -> Self {
        self.grid = grid;
        self
    }

    /// Square lattice of `cols` x `rows` nodes with two-way straight edges,
    /// `spacing` meters apart. Node ids are `r{row}c{col}`.
    pub fn lattice(cols: usize, rows: usize, spacing: f64, speed_limit: f64) -> Result<Self, NetworkError> {
        let mut nodes = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                nodes.push(Node {
                    id: format!("r{r}c{c}"),
                    position: Vec2::new(c as f64 * spacing, r as f64 * spacing),
                });
            }
        }
        let mut edges = Vec::new();
        let mut link = |a: usize, b: usize, nodes: &[Node]| -> Result<(), NetworkError> {
            for (from, to) in [(a, b), (b, a)] {
                edges.push(Edge {
                    from,
                    to,
                    length: spacing,
                    speed_limit,
                    spline: Spline::new(vec![nodes[from].position, nodes[to].position])?,
                });
            }
            Ok(())
        };
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                if c + 1 < cols {
                    link(i, i + 1, &nodes)?;
                }
                if r + 1 < rows {
                    link(i, i + cols, &nodes)?;
                }
            }
        }
        RoadNetwork::new(nodes, edges, Vec::new(), OccupancyGrid::empty())
    }
}
