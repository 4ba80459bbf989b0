use std::collections::BinaryHeap;

use super::{unwind, Graph, QueueEntry, Route, RouteError};

/// Goal-directed search with a caller-supplied lower bound on the distance to
/// `target`. The bound must be consistent; vertices whose bound is infinite
/// are never entered.
pub fn astar(g: &Graph, source: usize, target: usize, h: impl Fn(usize) -> f64) -> Result<Route, RouteError> {
    search(g, source, target, h, |_| true, None)
}

/// Straight-line heuristic toward `target`, scaled down so that it never
/// exceeds any edge's weight-per-meter. Falls back to zero without positions.
pub fn euclidean_heuristic(g: &Graph, target: usize) -> impl Fn(usize) -> f64 + '_ {
    let scale = g.positions().map_or(0.0, |pos| {
        let mut scale: f64 = 1.0;
        for u in 0..g.vertex_count() {
            for (_, v, w) in g.out_edges(u) {
                let d = pos[u].distance(pos[v]);
                if d > 0.0 {
                    scale = scale.min(w / d);
                }
            }
        }
        // leave headroom for rounding in the distance computation
        scale * (1.0 - 1e-12)
    });
    move |v| match g.positions() {
        Some(pos) if scale > 0.0 => scale * pos[v].distance(pos[target]),
        _ => 0.0,
    }
}

/// Shared label-setting search. `edge_ok` filters forward edges by index;
/// `relaxed` optionally records every forward edge that was relaxed.
pub(super) fn search(
    g: &Graph,
    source: usize,
    target: usize,
    h: impl Fn(usize) -> f64,
    edge_ok: impl Fn(usize) -> bool,
    mut relaxed: Option<&mut Vec<usize>>,
) -> Result<Route, RouteError> {
    g.check_vertex(source)?;
    g.check_vertex(target)?;
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut scanned = 0;

    let h0 = h(source);
    if h0 == f64::INFINITY {
        return Err(RouteError::Unreachable);
    }
    dist[source] = 0.0;
    heap.push(QueueEntry { key: h0, vertex: source });
    while let Some(QueueEntry { vertex: u, .. }) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        scanned += 1;
        if u == target {
            return Ok(g.route(unwind(&parent, source, target), scanned));
        }
        for (e, v, w) in g.out_edges(u) {
            if settled[v] || !edge_ok(e) {
                continue;
            }
            if let Some(log) = relaxed.as_deref_mut() {
                log.push(e);
            }
            let nd = dist[u] + w;
            if nd < dist[v] {
                let hv = h(v);
                if hv == f64::INFINITY {
                    continue;
                }
                dist[v] = nd;
                parent[v] = u;
                heap.push(QueueEntry { key: nd + hv, vertex: v });
            }
        }
    }
    Err(RouteError::Unreachable)
}
