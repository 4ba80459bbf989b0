use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{Graph, QueueEntry, Route, RouteError};

/// Settle limit for witness searches. A search cut short only adds a
/// redundant shortcut, never a wrong one.
const WITNESS_SETTLE_LIMIT: usize = 500;

/// A shortcut edge created while contracting `via`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shortcut {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub via: usize,
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    weight: f64,
    via: Option<usize>,
}

/// Contraction hierarchy: vertex order plus the upward/downward search graphs.
#[derive(Debug, Clone)]
pub struct ChIndex {
    /// `rank[v]` is the position of `v` in the contraction order.
    rank: Vec<usize>,
    order: Vec<usize>,
    /// forward search graph: `v -> w` with `rank[w] > rank[v]`
    up: Vec<Vec<(usize, f64)>>,
    /// backward search graph: for `u -> v` with `rank[u] > rank[v]`, stored at `v`
    down_rev: Vec<Vec<(usize, f64)>>,
    arcs: HashMap<(usize, usize), Arc>,
    shortcuts: Vec<Shortcut>,
}

/// Small adjacency map kept sorted by neighbour; degrees stay low enough
/// that a vector beats a tree.
#[derive(Debug, Clone, Default)]
struct Adj(Vec<(usize, Arc)>);

impl Adj {
    fn get(&self, k: usize) -> Option<&Arc> {
        self.0.binary_search_by_key(&k, |e| e.0).ok().map(|i| &self.0[i].1)
    }

    fn contains_key(&self, k: usize) -> bool {
        self.get(k).is_some()
    }

    fn insert(&mut self, k: usize, a: Arc) {
        match self.0.binary_search_by_key(&k, |e| e.0) {
            Ok(i) => self.0[i].1 = a,
            Err(i) => self.0.insert(i, (k, a)),
        }
    }

    fn insert_if_absent(&mut self, k: usize, a: Arc) {
        if let Err(i) = self.0.binary_search_by_key(&k, |e| e.0) {
            self.0.insert(i, (k, a));
        }
    }

    fn remove(&mut self, k: usize) {
        if let Ok(i) = self.0.binary_search_by_key(&k, |e| e.0) {
            self.0.remove(i);
        }
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn iter(&self) -> impl Iterator<Item = (usize, &Arc)> {
        self.0.iter().map(|(k, a)| (*k, a))
    }
}

/// Mutable remaining graph during contraction.
struct Overlay {
    out: Vec<Adj>,
    inc: Vec<Adj>,
    scratch: RefCell<Scratch>,
}

struct Scratch {
    dist: Vec<f64>,
    done: Vec<bool>,
    touched: Vec<usize>,
    heap: BinaryHeap<QueueEntry>,
}

impl Overlay {
    fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut out = vec![Adj::default(); n];
        let mut inc = vec![Adj::default(); n];
        for u in 0..n {
            for (_, v, w) in g.out_edges(u) {
                // adjacency is sorted by (head, weight): the first copy is the lightest
                out[u].insert_if_absent(v, Arc { weight: w, via: None });
                inc[v].insert_if_absent(u, Arc { weight: w, via: None });
            }
        }
        let scratch = Scratch {
            dist: vec![f64::INFINITY; n],
            done: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        };
        Overlay { out, inc, scratch: RefCell::new(scratch) }
    }

    /// Shortcuts `(u, w, weight)` needed if `v` were contracted now.
    fn needed_shortcuts(&self, v: usize) -> Vec<(usize, usize, f64)> {
        let mut needed = Vec::new();
        let outs: Vec<(usize, f64)> = self.out[v].iter().map(|(w, a)| (w, a.weight)).collect();
        if outs.is_empty() {
            return needed;
        }
        for (u, a_in) in self.inc[v].iter() {
            let targets: Vec<(usize, f64)> =
                outs.iter().filter(|&&(w, _)| w != u).map(|&(w, wv)| (w, a_in.weight + wv)).collect();
            if targets.is_empty() {
                continue;
            }
            let limit = targets.iter().map(|t| t.1).fold(0.0, f64::max);
            let witness = self.witness_search(u, v, limit, targets.len());
            for (w, cand) in targets {
                // an equally short path avoiding v makes the shortcut redundant
                if witness.dist[w] > cand {
                    needed.push((u, w, cand));
                }
            }
        }
        needed
    }

    /// Bounded Dijkstra from `source` that never enters `avoid`, stopping
    /// once `targets` out-neighbours of `avoid` are settled; the distances
    /// stay in the scratch buffer until the next search.
    fn witness_search(&self, source: usize, avoid: usize, limit: f64, targets: usize) -> std::cell::RefMut<'_, Scratch> {
        let mut sc = self.scratch.borrow_mut();
        let Scratch { dist, done, touched, heap } = &mut *sc;
        for &x in touched.iter() {
            dist[x] = f64::INFINITY;
            done[x] = false;
        }
        touched.clear();
        heap.clear();
        let mut settled = 0usize;
        let mut found = 0usize;
        dist[source] = 0.0;
        touched.push(source);
        heap.push(QueueEntry { key: 0.0, vertex: source });
        while let Some(QueueEntry { key, vertex: x }) = heap.pop() {
            if key > limit || settled >= WITNESS_SETTLE_LIMIT {
                break;
            }
            if std::mem::replace(&mut done[x], true) {
                continue;
            }
            settled += 1;
            if x != source && self.out[avoid].contains_key(x) {
                found += 1;
                if found == targets {
                    break;
                }
            }
            for (y, a) in self.out[x].iter() {
                if y == avoid {
                    continue;
                }
                let nd = key + a.weight;
                if nd <= limit && nd < dist[y] {
                    if dist[y] == f64::INFINITY {
                        touched.push(y);
                    }
                    dist[y] = nd;
                    heap.push(QueueEntry { key: nd, vertex: y });
                }
            }
        }
        sc
    }

    fn degree(&self, v: usize) -> usize {
        self.out[v].len() + self.inc[v].len()
    }
}

struct Contractor {
    overlay: Overlay,
    contracted_neighbours: Vec<i64>,
    index: ChIndex,
}

impl Contractor {
    fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        Contractor {
            overlay: Overlay::new(g),
            contracted_neighbours: vec![0; n],
            index: ChIndex {
                rank: vec![usize::MAX; n],
                order: Vec::with_capacity(n),
                up: vec![Vec::new(); n],
                down_rev: vec![Vec::new(); n],
                arcs: HashMap::new(),
                shortcuts: Vec::new(),
            },
        }
    }

    /// Priority of `v` and the shortcuts contracting it would add.
    fn simulate(&self, v: usize) -> (i64, Vec<(usize, usize, f64)>) {
        let ov = &self.overlay;
        let needed = ov.needed_shortcuts(v);
        (needed.len() as i64 - ov.degree(v) as i64 + self.contracted_neighbours[v], needed)
    }

    fn contract(&mut self, v: usize, needed: Vec<(usize, usize, f64)>) {
        let ix = &mut self.index;
        ix.rank[v] = ix.order.len();
        ix.order.push(v);
        let outs = std::mem::take(&mut self.overlay.out[v]);
        let ins = std::mem::take(&mut self.overlay.inc[v]);
        for (w, a) in outs.iter() {
            self.overlay.inc[w].remove(v);
            ix.up[v].push((w, a.weight));
            ix.arcs.insert((v, w), *a);
            self.contracted_neighbours[w] += 1;
        }
        for (u, a) in ins.iter() {
            self.overlay.out[u].remove(v);
            ix.down_rev[v].push((u, a.weight));
            ix.arcs.insert((u, v), *a);
            self.contracted_neighbours[u] += 1;
        }
        for (u, w, weight) in needed {
            let arc = Arc { weight, via: Some(v) };
            if self.overlay.out[u].get(w).is_none_or(|a| weight < a.weight) {
                self.overlay.out[u].insert(w, arc);
                self.overlay.inc[w].insert(u, arc);
                ix.shortcuts.push(Shortcut { from: u, to: w, weight, via: v });
            }
        }
    }
}

impl ChIndex {
    /// Contracts vertices in increasing priority, where priority is the edge
    /// difference plus the number of already-contracted neighbours, with
    /// lazy re-evaluation before each contraction.
    pub fn build(g: &Graph) -> Self {
        let mut c = Contractor::new(g);
        let mut heap: BinaryHeap<Reverse<(i64, usize)>> =
            (0..g.vertex_count()).map(|v| Reverse((c.simulate(v).0, v))).collect();
        while let Some(Reverse((_, v))) = heap.pop() {
            if c.index.rank[v] != usize::MAX {
                continue;
            }
            let (p, needed) = c.simulate(v);
            if heap.peek().is_some_and(|&Reverse((next, _))| p > next) {
                heap.push(Reverse((p, v)));
                continue;
            }
            c.contract(v, needed);
        }
        c.index
    }

    /// Contracts in a caller-given order (a permutation of the vertices).
    pub fn build_with_order(g: &Graph, order: &[usize]) -> Result<Self, RouteError> {
        let n = g.vertex_count();
        let mut seen = vec![false; n];
        if order.len() != n || !order.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true)) {
            return Err(RouteError::InvalidParameter("contraction order must be a permutation".into()));
        }
        let mut c = Contractor::new(g);
        for &v in order {
            let needed = c.overlay.needed_shortcuts(v);
            c.contract(v, needed);
        }
        Ok(c.index)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub fn shortcuts(&self) -> &[Shortcut] {
        &self.shortcuts
    }

    /// Expands the hierarchy edge `u -> w` into original-graph vertices,
    /// excluding `u` and including `w`.
    fn unpack_into(&self, u: usize, w: usize, out: &mut Vec<usize>) {
        match self.arcs[&(u, w)].via {
            None => out.push(w),
            Some(v) => {
                self.unpack_into(u, v, out);
                self.unpack_into(v, w, out);
            }
        }
    }

    /// Original-graph vertex sequence represented by a shortcut.
    pub fn unpack(&self, shortcut: &Shortcut) -> Vec<usize> {
        let mut path = vec![shortcut.from];
        self.unpack_into(shortcut.from, shortcut.via, &mut path);
        self.unpack_into(shortcut.via, shortcut.to, &mut path);
        path
    }

    /// Bidirectional upward search; the result is unpacked to original edges.
    pub fn query(&self, source: usize, target: usize) -> Result<Route, RouteError> {
        let n = self.rank.len();
        for v in [source, target] {
            if v >= n {
                return Err(RouteError::UnknownVertex(v));
            }
        }
        let mut dist = [vec![f64::INFINITY; n], vec![f64::INFINITY; n]];
        let mut parent = [vec![usize::MAX; n], vec![usize::MAX; n]];
        let mut settled = [vec![false; n], vec![false; n]];
        let mut heaps = [BinaryHeap::new(), BinaryHeap::new()];
        let roots = [source, target];
        for d in 0..2 {
            dist[d][roots[d]] = 0.0;
            heaps[d].push(QueueEntry { key: 0.0, vertex: roots[d] });
        }
        let mut best = f64::INFINITY;
        let mut meet = usize::MAX;
        let mut scanned = 0;
        loop {
            let tops = [heaps[0].peek().map(|e| e.key), heaps[1].peek().map(|e| e.key)];
            let active: Vec<usize> = (0..2).filter(|&d| tops[d].is_some_and(|k| k < best)).collect();
            let Some(&d) = active.iter().min_by(|&&a, &&b| tops[a].unwrap().total_cmp(&tops[b].unwrap())) else {
                break;
            };
            let QueueEntry { key, vertex: v } = heaps[d].pop().expect("active heap");
            if settled[d][v] {
                continue;
            }
            settled[d][v] = true;
            scanned += 1;
            let other = dist[1 - d][v];
            if key + other < best || (key + other == best && v < meet) {
                best = key + other;
                meet = v;
            }
            let adj = if d == 0 { &self.up[v] } else { &self.down_rev[v] };
            for &(x, w) in adj {
                let nd = key + w;
                if nd < dist[d][x] {
                    dist[d][x] = nd;
                    parent[d][x] = v;
                    heaps[d].push(QueueEntry { key: nd, vertex: x });
                }
            }
        }
        if best == f64::INFINITY {
            return Err(RouteError::Unreachable);
        }
        // hierarchy path s .. meet .. t
        let mut up_part = vec![meet];
        let mut v = meet;
        while v != source {
            v = parent[0][v];
            up_part.push(v);
        }
        up_part.reverse();
        let mut hier = up_part;
        let mut v = meet;
        while v != target {
            v = parent[1][v];
            hier.push(v);
        }
        let mut nodes = vec![source];
        for w in hier.windows(2) {
            self.unpack_into(w[0], w[1], &mut nodes);
        }
        let cost = nodes
            .windows(2)
            .map(|w| self.arcs[&(w[0], w[1])].weight)
            .fold(0.0, |acc, x| acc + x);
        Ok(Route { nodes, cost, scanned_vertices: scanned })
    }
}
