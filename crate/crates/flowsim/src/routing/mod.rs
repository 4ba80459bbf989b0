//! Exact point-to-point shortest paths over the lane graph.
//!
//! Every technique answers the same query as plain Dijkstra and must return
//! the same cost; they differ in how many vertices they scan and in what they
//! precompute. Ties are broken toward the smaller vertex index everywhere, so
//! results are reproducible.

mod alt;
mod arcflags;
mod astar;
mod ch;
mod dijkstra;
mod reach;

use std::cmp::Ordering;
use std::str::FromStr;

pub use alt::{landmark_bound, AltIndex};
pub use arcflags::ArcFlagIndex;
pub use astar::{astar, euclidean_heuristic};
pub use ch::{ChIndex, Shortcut};
pub use dijkstra::{dijkstra, distances_from, distances_to};
pub use reach::{ReachIndex, MAX_EXACT_REACH_NODES};

use crate::geom::Vec2;
use crate::network::RoadNetwork;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("target unreachable")]
    Unreachable,
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),
    #[error("graph has {n} vertices; exact reach preprocessing is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid edge {index}: {reason}")]
    InvalidEdge { index: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A shortest path as a vertex sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    /// Sum of edge weights along `nodes`, accumulated front to back.
    pub cost: f64,
    /// Vertices settled by the search (both directions for bidirectional ones).
    pub scanned_vertices: usize,
}

/// How an edge is weighted for routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Meters.
    #[default]
    Length,
    /// Seconds at the lane's speed limit.
    TravelTime,
}

/// Weighted directed graph in compressed adjacency form, with forward and
/// reverse adjacency. Adjacency lists are sorted by neighbor index.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    out_start: Vec<usize>,
    out_head: Vec<u32>,
    out_weight: Vec<f64>,
    in_start: Vec<usize>,
    in_tail: Vec<u32>,
    in_weight: Vec<f64>,
    positions: Option<Vec<Vec2>>,
}

impl Graph {
    /// Builds a graph from `(from, to, weight)` triples. Weights must be
    /// positive and finite.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, RouteError> {
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(RouteError::InvalidEdge { index: i, reason: "endpoint out of range".into() });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(RouteError::InvalidEdge { index: i, reason: format!("weight {w} is not positive") });
            }
        }
        let mut fwd: Vec<(u32, u32, f64)> = edges.iter().map(|&(u, v, w)| (u as u32, v as u32, w)).collect();
        fwd.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut rev: Vec<(u32, u32, f64)> = fwd.iter().map(|&(u, v, w)| (v, u, w)).collect();
        rev.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let (out_start, out_head, out_weight) = compress(n, &fwd);
        let (in_start, in_tail, in_weight) = compress(n, &rev);
        Ok(Graph { n, out_start, out_head, out_weight, in_start, in_tail, in_weight, positions: None })
    }

    pub fn from_network(net: &RoadNetwork, weighting: Weighting) -> Self {
        let edges: Vec<(usize, usize, f64)> = net
            .edges()
            .iter()
            .map(|e| {
                let w = match weighting {
                    Weighting::Length => e.length,
                    Weighting::TravelTime => e.length / e.speed_limit,
                };
                (e.from, e.to, w)
            })
            .collect();
        let g = Graph::from_edges(net.node_count(), &edges).expect("validated network edges are positive");
        g.with_positions(net.nodes().iter().map(|n| n.position).collect())
    }

    /// Attaches vertex coordinates, enabling the Euclidean A* heuristic.
    pub fn with_positions(mut self, positions: Vec<Vec2>) -> Self {
        assert_eq!(positions.len(), self.n, "one position per vertex");
        self.positions = Some(positions);
        self
    }

    pub fn positions(&self) -> Option<&[Vec2]> {
        self.positions.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_head.len()
    }

    /// Outgoing `(edge index, head, weight)`.
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (self.out_start[v]..self.out_start[v + 1]).map(move |e| (e, self.out_head[e] as usize, self.out_weight[e]))
    }

    /// Incoming `(tail, weight)`.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.in_start[v]..self.in_start[v + 1]).map(move |e| (self.in_tail[e] as usize, self.in_weight[e]))
    }

    /// Tail vertex of forward edge `e`.
    pub fn edge_tail(&self, e: usize) -> usize {
        self.out_start.partition_point(|&s| s <= e) - 1
    }

    /// Smallest weight among parallel edges `u -> v`.
    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let range = self.out_start[u]..self.out_start[u + 1];
        let heads = &self.out_head[range.clone()];
        let first = heads.partition_point(|&h| (h as usize) < v);
        // sorted by (head, weight), so the first match is the lightest
        (first < heads.len() && heads[first] as usize == v).then(|| self.out_weight[range.start + first])
    }

    /// Cost of a vertex sequence, summed front to back using the lightest
    /// parallel edge for each hop.
    pub fn path_cost(&self, nodes: &[usize]) -> Option<f64> {
        nodes.windows(2).try_fold(0.0, |acc, w| self.weight(w[0], w[1]).map(|x| acc + x))
    }

    fn check_vertex(&self, v: usize) -> Result<(), RouteError> {
        if v < self.n {
            Ok(())
        } else {
            Err(RouteError::UnknownVertex(v))
        }
    }

    fn route(&self, nodes: Vec<usize>, scanned: usize) -> Route {
        let cost = self.path_cost(&nodes).expect("search paths follow graph edges");
        Route { nodes, cost, scanned_vertices: scanned }
    }
}

fn compress(n: usize, sorted: &[(u32, u32, f64)]) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
    let mut start = vec![0usize; n + 1];
    for &(u, _, _) in sorted {
        start[u as usize + 1] += 1;
    }
    for i in 0..n {
        start[i + 1] += start[i];
    }
    (start, sorted.iter().map(|e| e.1).collect(), sorted.iter().map(|e| e.2).collect())
}

/// Priority-queue key: distance then vertex index, smallest first.
#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    key: f64,
    vertex: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for BinaryHeap's max-first order
        other.key.total_cmp(&self.key).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Walks a parent array back from `target`.
fn unwind(parent: &[usize], source: usize, target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut v = target;
    while v != source {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// Selectable routing technique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Dijkstra,
    AStar,
    Alt,
    ArcFlags,
    Ch,
    Reach,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] =
        [Algorithm::Dijkstra, Algorithm::AStar, Algorithm::Alt, Algorithm::ArcFlags, Algorithm::Ch, Algorithm::Reach];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dijkstra => "dijkstra",
            Algorithm::AStar => "astar",
            Algorithm::Alt => "alt",
            Algorithm::ArcFlags => "arcflags",
            Algorithm::Ch => "ch",
            Algorithm::Reach => "reach",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
            format!("unknown algorithm \"{s}\"; valid names: {}", names.join(", "))
        })
    }
}

/// Default landmark count for ALT.
pub const DEFAULT_LANDMARKS: usize = 4;
/// Default cell count for Arc Flags.
pub const DEFAULT_CELLS: usize = 8;

enum Prepared {
    Dijkstra,
    AStar,
    Alt(AltIndex),
    ArcFlags(ArcFlagIndex),
    Ch(ChIndex),
    Reach(ReachIndex),
}

/// A graph plus whatever index the chosen technique needs.
pub struct Router {
    graph: Graph,
    prepared: Prepared,
}

impl Router {
    pub fn build(graph: Graph, algorithm: Algorithm, seed: u64) -> Result<Self, RouteError> {
        let prepared = match algorithm {
            Algorithm::Dijkstra => Prepared::Dijkstra,
            Algorithm::AStar => Prepared::AStar,
            Algorithm::Alt => {
                let k = DEFAULT_LANDMARKS.min(graph.vertex_count());
                if k == 0 {
                    Prepared::Dijkstra
                } else {
                    Prepared::Alt(AltIndex::build(&graph, k, seed)?)
                }
            }
            Algorithm::ArcFlags => Prepared::ArcFlags(ArcFlagIndex::build(&graph, DEFAULT_CELLS, seed)?),
            Algorithm::Ch => Prepared::Ch(ChIndex::build(&graph)),
            Algorithm::Reach => Prepared::Reach(ReachIndex::build(&graph)?),
        };
        Ok(Router { graph, prepared })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn query(&self, source: usize, target: usize) -> Result<Route, RouteError> {
        let g = &self.graph;
        match &self.prepared {
            Prepared::Dijkstra => dijkstra(g, source, target),
            Prepared::AStar => {
                let h = euclidean_heuristic(g, target);
                astar(g, source, target, |v| h(v))
            }
            Prepared::Alt(idx) => idx.query(g, source, target),
            Prepared::ArcFlags(idx) => idx.query(g, source, target),
            Prepared::Ch(idx) => idx.query(source, target),
            Prepared::Reach(idx) => idx.query(g, source, target),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_picks_lightest_parallel_edge() {
        let g = Graph::from_edges(2, &[(0, 1, 5.0), (0, 1, 2.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(g.weight(0, 1), Some(2.0));
        assert_eq!(g.weight(1, 0), Some(1.0));
        assert_eq!(g.edge_tail(2), 1);
        assert_eq!(g.path_cost(&[0, 1, 0]), Some(3.0));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(2, &[(0, 2, 1.0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 1, 0.0)]).is_err());
        assert!(Graph::from_edges(2, &[(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        let err = "bfs".parse::<Algorithm>().unwrap_err();
        assert!(err.contains("dijkstra") && err.contains("reach"));
    }
}
