use std::collections::BinaryHeap;

use super::{astar, Graph, QueueEntry, Route, RouteError};

/// Baseline label-setting search; stops once `target` is settled.
pub fn dijkstra(g: &Graph, source: usize, target: usize) -> Result<Route, RouteError> {
    astar::search(g, source, target, |_| 0.0, |_| true, None)
}

/// Single-source distances `d(source, v)` for every vertex.
pub fn distances_from(g: &Graph, source: usize) -> Vec<f64> {
    sssp(g, source, false)
}

/// Single-target distances `d(v, target)` for every vertex.
pub fn distances_to(g: &Graph, target: usize) -> Vec<f64> {
    sssp(g, target, true)
}

fn sssp(g: &Graph, root: usize, reverse: bool) -> Vec<f64> {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(QueueEntry { key: 0.0, vertex: root });
    while let Some(QueueEntry { key, vertex: u }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        let mut relax = |v: usize, w: f64| {
            let nd = key + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(QueueEntry { key: nd, vertex: v });
            }
        };
        if reverse {
            for (v, w) in g.in_edges(u) {
                relax(v, w);
            }
        } else {
            for (_, v, w) in g.out_edges(u) {
                relax(v, w);
            }
        }
    }
    dist
}
