use std::collections::BinaryHeap;

use super::{distances_from, Graph, QueueEntry, Route, RouteError};

/// Exact reach needs one shortest-path tree per vertex, so preprocessing is
/// quadratic; larger graphs are refused rather than silently approximated.
pub const MAX_EXACT_REACH_NODES: usize = 4096;

/// Per-vertex reach values.
#[derive(Debug, Clone)]
pub struct ReachIndex {
    reach: Vec<f64>,
}

fn tight(du: f64, w: f64, dv: f64) -> bool {
    (du + w - dv).abs() <= 1e-9 * dv.abs().max(1.0)
}

impl ReachIndex {
    /// For every source, walks its shortest-path DAG from the far end and
    /// records `min(d(s,v), d(v,t))` maximised over DAG descendants `t`.
    pub fn build(g: &Graph) -> Result<Self, RouteError> {
        let n = g.vertex_count();
        if n > MAX_EXACT_REACH_NODES {
            return Err(RouteError::TooLarge { n, limit: MAX_EXACT_REACH_NODES });
        }
        let mut reach = vec![0.0f64; n];
        let mut far = vec![0.0f64; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for s in 0..n {
            let d = distances_from(g, s);
            order.clear();
            order.extend((0..n).filter(|&v| d[v].is_finite()));
            order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(b.cmp(&a)));
            for &v in &order {
                // farthest distance from s among shortest paths leaving through v
                let mut m = d[v];
                for (_, w, wt) in g.out_edges(v) {
                    if d[w].is_finite() && tight(d[v], wt, d[w]) {
                        m = m.max(far[w]);
                    }
                }
                far[v] = m;
                let r = d[v].min(m - d[v]);
                if r > reach[v] {
                    reach[v] = r;
                }
            }
        }
        Ok(ReachIndex { reach })
    }

    pub fn reach(&self, v: usize) -> f64 {
        self.reach[v]
    }

    pub fn values(&self) -> &[f64] {
        &self.reach
    }

    /// Bidirectional Dijkstra that skips vertices whose reach is too small to
    /// matter at their distance from both endpoints.
    pub fn query(&self, g: &Graph, source: usize, target: usize) -> Result<Route, RouteError> {
        g.check_vertex(source)?;
        g.check_vertex(target)?;
        if self.reach.len() != g.vertex_count() {
            return Err(RouteError::InvalidParameter("reach index built for another graph".into()));
        }
        if source == target {
            return Ok(g.route(vec![source], 1));
        }
        let n = g.vertex_count();
        let mut dist = [vec![f64::INFINITY; n], vec![f64::INFINITY; n]];
        let mut parent = [vec![usize::MAX; n], vec![usize::MAX; n]];
        let mut settled = [vec![false; n], vec![false; n]];
        let mut heaps = [BinaryHeap::new(), BinaryHeap::new()];
        let roots = [source, target];
        for d in 0..2 {
            dist[d][roots[d]] = 0.0;
            heaps[d].push(QueueEntry { key: 0.0, vertex: roots[d] });
        }
        let mut mu = f64::INFINITY;
        // meeting edge (a, b): a reached forward, b reached backward
        let mut meet = (usize::MAX, usize::MAX);
        let mut scanned = 0;
        loop {
            let top = |h: &BinaryHeap<QueueEntry>| h.peek().map(|e| e.key).filter(|&k| k <= mu / 2.0);
            let d = match (top(&heaps[0]), top(&heaps[1])) {
                (None, None) => break,
                (Some(_), None) => 0,
                (None, Some(_)) => 1,
                (Some(a), Some(b)) => usize::from(b < a),
            };
            let QueueEntry { key, vertex: v } = heaps[d].pop().expect("non-empty heap");
            if settled[d][v] {
                continue;
            }
            settled[d][v] = true;
            let lb = if settled[1 - d][v] {
                dist[1 - d][v]
            } else {
                heaps[1 - d].peek().map_or(f64::INFINITY, |e| e.key)
            };
            if self.reach[v] + 1e-9 * key.max(1.0) < key.min(lb) {
                continue;
            }
            scanned += 1;
            let mut relax = |x: usize, w: f64| {
                let nd = key + w;
                if nd < dist[d][x] {
                    dist[d][x] = nd;
                    parent[d][x] = v;
                    heaps[d].push(QueueEntry { key: nd, vertex: x });
                }
                let total = nd + dist[1 - d][x];
                if total < mu {
                    mu = total;
                    meet = if d == 0 { (v, x) } else { (x, v) };
                }
            };
            if d == 0 {
                for (_, x, w) in g.out_edges(v) {
                    relax(x, w);
                }
            } else {
                for (x, w) in g.in_edges(v) {
                    relax(x, w);
                }
            }
        }
        if mu == f64::INFINITY {
            return Err(RouteError::Unreachable);
        }
        let (a, b) = meet;
        let mut nodes = vec![a];
        let mut v = a;
        while v != source {
            v = parent[0][v];
            nodes.push(v);
        }
        nodes.reverse();
        let mut v = b;
        nodes.push(v);
        while v != target {
            v = parent[1][v];
            nodes.push(v);
        }
        Ok(g.route(nodes, scanned))
    }
}
