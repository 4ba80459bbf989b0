use std::collections::{BinaryHeap, VecDeque};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{astar, Graph, QueueEntry, Route, RouteError};

/// Per-edge cell bitsets for Arc Flags queries.
#[derive(Debug, Clone)]
pub struct ArcFlagIndex {
    cell_of: Vec<usize>,
    cells: usize,
    words: usize,
    /// `words` u64s per forward edge
    flags: Vec<u64>,
}

impl ArcFlagIndex {
    /// Partitions into `k` cells by round-robin BFS growth from seeded random
    /// centers, then sets flags along backward shortest-path trees grown
    /// from every boundary vertex of every cell.
    pub fn build(g: &Graph, k: usize, seed: u64) -> Result<Self, RouteError> {
        if k == 0 {
            return Err(RouteError::InvalidParameter("cell count must be at least 1".into()));
        }
        let cell_of = partition(g, k, seed);
        Ok(Self::with_partition(g, cell_of))
    }

    /// Computes flags for a given vertex-to-cell assignment.
    pub fn with_partition(g: &Graph, cell_of: Vec<usize>) -> Self {
        assert_eq!(cell_of.len(), g.vertex_count());
        let cells = cell_of.iter().map(|&c| c + 1).max().unwrap_or(1);
        let words = cells.div_ceil(64);
        let mut idx = ArcFlagIndex { cell_of, cells, words, flags: vec![0; g.edge_count() * words] };
        let n = g.vertex_count();
        for u in 0..n {
            for (e, v, _) in g.out_edges(u) {
                if idx.cell_of[u] == idx.cell_of[v] {
                    idx.set(e, idx.cell_of[v]);
                }
            }
        }
        for b in 0..n {
            let cell = idx.cell_of[b];
            let is_boundary = g.in_edges(b).any(|(u, _)| idx.cell_of[u] != cell);
            if is_boundary {
                for e in backward_tree(g, b) {
                    idx.set(e, cell);
                }
            }
        }
        idx
    }

    fn set(&mut self, edge: usize, cell: usize) {
        self.flags[edge * self.words + cell / 64] |= 1 << (cell % 64);
    }

    pub fn flag(&self, edge: usize, cell: usize) -> bool {
        self.flags[edge * self.words + cell / 64] & (1 << (cell % 64)) != 0
    }

    pub fn cell_of(&self, v: usize) -> usize {
        self.cell_of[v]
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn query(&self, g: &Graph, source: usize, target: usize) -> Result<Route, RouteError> {
        g.check_vertex(target)?;
        let cell = self.cell_of[target];
        astar::search(g, source, target, |_| 0.0, |e| self.flag(e, cell), None)
    }

    /// Like [`ArcFlagIndex::query`], also returning every relaxed forward edge.
    pub fn query_logged(&self, g: &Graph, source: usize, target: usize) -> (Result<Route, RouteError>, Vec<usize>) {
        if let Err(e) = g.check_vertex(target) {
            return (Err(e), Vec::new());
        }
        let cell = self.cell_of[target];
        let mut log = Vec::new();
        let r = astar::search(g, source, target, |_| 0.0, |e| self.flag(e, cell), Some(&mut log));
        (r, log)
    }
}

/// Forward edge indices of a shortest-path tree into `root`.
fn backward_tree(g: &Graph, root: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(QueueEntry { key: 0.0, vertex: root });
    let mut tree = Vec::new();
    while let Some(QueueEntry { key, vertex: v }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        if v != root {
            tree.push(parent_edge[v]);
        }
        for (u, _) in g.in_edges(v) {
            // locate the matching forward edge u -> v (lightest parallel copy)
            let (e, _, w) = g.out_edges(u).find(|&(_, h, _)| h == v).expect("reverse edge has a forward twin");
            let nd = key + w;
            if nd < dist[u] {
                dist[u] = nd;
                parent_edge[u] = e;
                heap.push(QueueEntry { key: nd, vertex: u });
            }
        }
    }
    tree
}

/// k-way partition by round-robin breadth-first growth over the undirected
/// version of the graph.
fn partition(g: &Graph, k: usize, seed: u64) -> Vec<usize> {
    let n = g.vertex_count();
    let k = k.min(n.max(1));
    let mut cell_of = vec![usize::MAX; n];
    if n == 0 {
        return cell_of;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = sample(&mut rng, n, k).into_vec();
    centers.sort_unstable();
    let mut sizes = vec![0usize; k];
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); k];
    for (c, &v) in centers.iter().enumerate() {
        cell_of[v] = c;
        sizes[c] += 1;
        queues[c].push_back(v);
    }
    let neighbours = |v: usize| -> Vec<usize> {
        let mut ns: Vec<usize> = g.out_edges(v).map(|(_, h, _)| h).chain(g.in_edges(v).map(|(t, _)| t)).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    };
    loop {
        let mut grew = false;
        for c in 0..k {
            // expand one frontier vertex per cell per round
            if let Some(v) = queues[c].pop_front() {
                grew = true;
                for u in neighbours(v) {
                    if cell_of[u] == usize::MAX {
                        cell_of[u] = c;
                        sizes[c] += 1;
                        queues[c].push_back(u);
                    }
                }
            }
        }
        if grew {
            continue;
        }
        // components without a center go to the currently smallest cell
        let Some(v) = cell_of.iter().position(|&c| c == usize::MAX) else { break };
        let c = (0..k).min_by_key(|&c| (sizes[c], c)).expect("k >= 1");
        cell_of[v] = c;
        sizes[c] += 1;
        queues[c].push_back(v);
    }
    cell_of
}

#[cfg(test)]
mod tests {
    use super::super::testgraphs::random_digraph;
    use super::super::{dijkstra, Graph};
    use super::*;

    #[test]
    fn single_cell_does_not_prune() {
        for seed in 0..30 {
            let g = random_digraph(seed, 60, 240);
            let idx = ArcFlagIndex::build(&g, 1, seed).unwrap();
            let n = g.vertex_count();
            for t in 0..n {
                assert_eq!(idx.query(&g, 0, t), dijkstra(&g, 0, t));
            }
        }
    }

    #[test]
    fn matches_dijkstra_on_random_graphs() {
        for seed in 0..100 {
            let g = random_digraph(500 + seed, 150, 600);
            let idx = ArcFlagIndex::build(&g, 4, seed).unwrap();
            let n = g.vertex_count();
            for s in (0..n).step_by(7) {
                for t in (0..n).step_by(5) {
                    let a = idx.query(&g, s, t).map(|r| r.cost);
                    let d = dijkstra(&g, s, t).map(|r| r.cost);
                    assert_eq!(a, d, "seed {seed} {s}->{t}");
                }
            }
        }
    }

    #[test]
    fn line_graph_never_relaxes_away_from_target() {
        // two-way line 0-1-2-3-4-5, cells {0,1,2} and {3,4,5}
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, i + 1, 1.0));
            edges.push((i + 1, i, 1.0));
        }
        let g = Graph::from_edges(6, &edges).unwrap();
        let idx = ArcFlagIndex::with_partition(&g, vec![0, 0, 0, 1, 1, 1]);
        let (r, log) = idx.query_logged(&g, 1, 4);
        assert_eq!(r.unwrap().nodes, vec![1, 2, 3, 4]);
        for e in log {
            let (u, v) = (g.edge_tail(e), g.out_edges(g.edge_tail(e)).find(|x| x.0 == e).unwrap().1);
            assert!(v > u, "relaxed backward edge {u}->{v}");
        }
    }

    #[test]
    fn partition_covers_everything() {
        let g = random_digraph(3, 200, 100);
        let idx = ArcFlagIndex::build(&g, 5, 9).unwrap();
        for v in 0..g.vertex_count() {
            assert!(idx.cell_of(v) < idx.cell_count());
        }
    }
}
