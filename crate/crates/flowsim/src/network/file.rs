//! On-disk JSON schema for road networks.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::{Edge, NetworkError, Node, OccupancyGrid, Phase, RoadNetwork, Spline, TrafficLight};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct NetworkFile {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    lights: Vec<LightRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<GridRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: String,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: String,
    to: String,
    length: f64,
    speed_limit: f64,
    spline: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LightRecord {
    position: Vec2,
    /// Index into `edges`.
    edge: usize,
    schedule: Vec<Phase>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRecord {
    origin: Vec2,
    cell_size: f64,
    width: usize,
    height: usize,
    /// One string per row of `0`/`1`, first row at `origin.y`.
    passable: Vec<String>,
}

impl NetworkFile {
    pub(super) fn into_network(self) -> Result<RoadNetwork, NetworkError> {
        let nodes: Vec<Node> = self
            .nodes
            .into_iter()
            .map(|n| Node { id: n.id, position: Vec2::new(n.x, n.y) })
            .collect();
        let lookup = |id: &str| -> Result<usize, NetworkError> {
            nodes.iter().position(|n| n.id == id).ok_or_else(|| NetworkError::UnknownNode(id.to_owned()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.into_iter().enumerate() {
            let spline = Spline::new(e.spline).map_err(|err| NetworkError::InvalidEdge {
                index: i,
                reason: err.to_string(),
            })?;
            edges.push(Edge {
                from: lookup(&e.from)?,
                to: lookup(&e.to)?,
                length: e.length,
                speed_limit: e.speed_limit,
                spline,
            });
        }
        let lights = self
            .lights
            .into_iter()
            .map(|l| TrafficLight::new(l.position, l.edge, l.schedule))
            .collect::<Result<Vec<_>, _>>()?;
        let grid = match self.grid {
            Some(g) => g.into_grid()?,
            None => OccupancyGrid::empty(),
        };
        RoadNetwork::new(nodes, edges, lights, grid)
    }

    pub(super) fn from_network(net: &RoadNetwork) -> Self {
        NetworkFile {
            nodes: net
                .nodes
                .iter()
                .map(|n| NodeRecord { id: n.id.clone(), x: n.position.x, y: n.position.y })
                .collect(),
            edges: net
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    from: net.nodes[e.from].id.clone(),
                    to: net.nodes[e.to].id.clone(),
                    length: e.length,
                    speed_limit: e.speed_limit,
                    spline: e.spline.points().to_vec(),
                })
                .collect(),
            lights: net
                .lights
                .iter()
                .map(|l| LightRecord { position: l.position, edge: l.controlled_edge, schedule: l.schedule().to_vec() })
                .collect(),
            grid: (!net.grid.is_empty()).then(|| GridRecord::from_grid(&net.grid)),
        }
    }
}

impl GridRecord {
    fn into_grid(self) -> Result<OccupancyGrid, NetworkError> {
        if self.passable.len() != self.height {
            return Err(NetworkError::Grid(format!(
                "expected {} rows, got {}",
                self.height,
                self.passable.len()
            )));
        }
        let mut cells = Vec::with_capacity(self.width * self.height);
        for (r, row) in self.passable.iter().enumerate() {
            if row.len() != self.width {
                return Err(NetworkError::Grid(format!("row {r} has {} cells, expected {}", row.len(), self.width)));
            }
            for ch in row.chars() {
                cells.push(match ch {
                    '1' => true,
                    '0' => false,
                    other => return Err(NetworkError::Grid(format!("row {r}: unexpected character {other:?}"))),
                });
            }
        }
        OccupancyGrid::new(self.origin, self.cell_size, self.width, self.height, cells)
    }

    fn from_grid(g: &OccupancyGrid) -> Self {
        let passable = g
            .passable_cells()
            .chunks(g.width())
            .map(|row| row.iter().map(|&p| if p { '1' } else { '0' }).collect())
            .collect();
        GridRecord { origin: g.origin(), cell_size: g.cell_size(), width: g.width(), height: g.height(), passable }
    }
}
