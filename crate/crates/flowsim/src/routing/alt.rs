use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{astar, distances_from, distances_to, Graph, Route, RouteError};

/// Landmark distance tables for ALT queries.
#[derive(Debug, Clone)]
pub struct AltIndex {
    landmarks: Vec<usize>,
    /// `from[i][v] = d(landmark_i, v)`
    from: Vec<Vec<f64>>,
    /// `to[i][v] = d(v, landmark_i)`
    to: Vec<Vec<f64>>,
}

/// Lower bound on `d(v, t)` from one landmark `L`, given `d(L,v)`, `d(L,t)`,
/// `d(v,L)` and `d(t,L)`.
///
/// Uses `d(L,t) - d(L,v)` and `d(v,L) - d(t,L)`, both valid on directed graphs.
/// Infinite distances that prove `t` unreachable from `v` yield infinity.
pub fn landmark_bound(from_l_v: f64, from_l_t: f64, to_v_l: f64, to_t_l: f64) -> f64 {
    let inf = f64::INFINITY;
    // L reaches v but not t: then v cannot reach t
    if from_l_v < inf && from_l_t == inf {
        return inf;
    }
    // t reaches L but v does not: then v cannot reach t
    if to_t_l < inf && to_v_l == inf {
        return inf;
    }
    let mut bound: f64 = 0.0;
    if from_l_v < inf {
        bound = bound.max(from_l_t - from_l_v);
    }
    if to_t_l < inf {
        bound = bound.max(to_v_l - to_t_l);
    }
    bound
}

impl AltIndex {
    /// Picks `k` landmarks by farthest-point selection starting from a
    /// seeded random vertex, then tabulates distances to and from each.
    pub fn build(g: &Graph, k: usize, seed: u64) -> Result<Self, RouteError> {
        let n = g.vertex_count();
        if k == 0 || k > n {
            return Err(RouteError::InvalidParameter(format!("landmark count {k} not in 1..={n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = rng.random_range(0..n);
        let mut landmarks = Vec::with_capacity(k);
        let mut from = Vec::with_capacity(k);
        let mut to = Vec::with_capacity(k);
        // unreachable vertices count as infinitely far, so every component gets covered
        let mut closest = distances_from(g, start);
        let mut chosen = vec![false; n];
        while landmarks.len() < k {
            let l = (0..n)
                .filter(|&v| !chosen[v])
                .max_by(|&a, &b| closest[a].total_cmp(&closest[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a candidate");
            chosen[l] = true;
            let dl = distances_from(g, l);
            if landmarks.is_empty() {
                closest = dl.clone();
            } else {
                for v in 0..n {
                    closest[v] = closest[v].min(dl[v]);
                }
            }
            landmarks.push(l);
            to.push(distances_to(g, l));
            from.push(dl);
        }
        Ok(AltIndex { landmarks, from, to })
    }

    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    /// Best landmark lower bound on `d(v, target)`.
    pub fn lower_bound(&self, v: usize, target: usize) -> f64 {
        (0..self.landmarks.len())
            .map(|i| landmark_bound(self.from[i][v], self.from[i][target], self.to[i][v], self.to[i][target]))
            .fold(0.0, f64::max)
    }

    pub fn query(&self, g: &Graph, source: usize, target: usize) -> Result<Route, RouteError> {
        g.check_vertex(target)?;
        astar(g, source, target, |v| self.lower_bound(v, target))
    }
}
