use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Vec2;
use crate::network::OccupancyGrid;

use super::MotionError;

/// Rejection attempts per accepted sample before giving up on finding
/// passable space.
const MAX_REJECTIONS: usize = 1000;

/// Rapidly-exploring random tree from `start`, extended one cell per sample
/// toward uniformly drawn passable points. Seeded and deterministic.
pub fn sample_plan(
    grid: &OccupancyGrid,
    start: Vec2,
    goal: Vec2,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Vec2>, MotionError> {
    if !grid.is_point_passable(start) {
        return Err(MotionError::StartBlocked);
    }
    if !grid.is_point_passable(goal) {
        return Err(MotionError::GoalBlocked);
    }
    if start == goal {
        return Ok(vec![start]);
    }
    let step = grid.cell_size();
    let lo = grid.origin();
    let hi = lo + Vec2::new(grid.width() as f64, grid.height() as f64) * step;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![start];
    let mut parent = vec![usize::MAX];
    let reaches_goal = |p: Vec2| p.distance(goal) <= step && grid.segment_is_free(p, goal);
    let finish = |nodes: &[Vec2], parent: &[usize], last: usize| {
        let mut path = vec![goal];
        let mut i = last;
        while i != usize::MAX {
            path.push(nodes[i]);
            i = parent[i];
        }
        path.reverse();
        path
    };
    if reaches_goal(start) {
        return Ok(vec![start, goal]);
    }
    for _ in 0..n_samples {
        let mut sample = None;
        for _ in 0..MAX_REJECTIONS {
            let p = Vec2::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
            if grid.is_point_passable(p) {
                sample = Some(p);
                break;
            }
        }
        let Some(sample) = sample else { break };
        let (near, _) = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (i, n.distance(sample)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("tree has a root");
        let from = nodes[near];
        let d = from.distance(sample);
        if d == 0.0 {
            continue;
        }
        let to = if d <= step { sample } else { from + (sample - from) * (step / d) };
        if !grid.segment_is_free(from, to) {
            continue;
        }
        nodes.push(to);
        parent.push(near);
        if reaches_goal(to) {
            return Ok(finish(&nodes, &parent, nodes.len() - 1));
        }
    }
    Err(MotionError::NoPath)
}
