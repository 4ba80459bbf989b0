use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use crate::geom::Vec2;
use crate::network::{Cell, OccupancyGrid};

use super::MotionError;

/// A cell path plus its world-space polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    /// Cell centers.
    pub points: Vec<Vec2>,
    /// In cell units: straight moves cost 1, diagonal moves √2.
    pub cost: f64,
    pub expanded: usize,
}

/// Admissible distance for 8-connected unit moves.
pub fn octile(a: Cell, b: Cell) -> f64 {
    let dx = a.col.abs_diff(b.col) as f64;
    let dy = a.row.abs_diff(b.row) as f64;
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on f, then prefer deeper nodes, then smaller index
        other.f.total_cmp(&self.f).then(self.g.total_cmp(&other.g)).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// 8-connected neighbours of `c`; a diagonal step needs both side cells free
/// so the path never clips a blocked corner.
pub(crate) fn neighbours(grid: &OccupancyGrid, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    const DIRS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    DIRS.iter().filter_map(move |&(dx, dy)| {
        let col = c.col.checked_add_signed(dx as isize)?;
        let row = c.row.checked_add_signed(dy as isize)?;
        let n = Cell::new(col, row);
        if !grid.contains(n) || !grid.is_passable(n) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal && !(grid.is_passable(Cell::new(col, c.row)) && grid.is_passable(Cell::new(c.col, row))) {
            return None;
        }
        Some((n, diagonal))
    })
}

/// A* over passable cells with the octile heuristic.
pub fn grid_plan(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Result<GridPath, MotionError> {
    if !grid.contains(start) || !grid.is_passable(start) {
        return Err(MotionError::StartBlocked);
    }
    if !grid.contains(goal) || !grid.is_passable(goal) {
        return Err(MotionError::GoalBlocked);
    }
    let n = grid.width() * grid.height();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let s = grid.index(start);
    let t = grid.index(goal);
    g[s] = 0.0;
    heap.push(Entry { f: octile(start, goal), g: 0.0, idx: s });
    let mut expanded = 0;
    while let Some(Entry { g: gc, idx, .. }) = heap.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        expanded += 1;
        if idx == t {
            break;
        }
        let c = grid.cell_at_index(idx);
        for (nb, diagonal) in neighbours(grid, c) {
            let ni = grid.index(nb);
            let ng = gc + if diagonal { SQRT_2 } else { 1.0 };
            if ng < g[ni] {
                g[ni] = ng;
                parent[ni] = idx;
                heap.push(Entry { f: ng + octile(nb, goal), g: ng, idx: ni });
            }
        }
    }
    if !closed[t] {
        return Err(MotionError::NoPath);
    }
    let mut idxs = vec![t];
    while *idxs.last().expect("non-empty") != s {
        idxs.push(parent[*idxs.last().expect("non-empty")]);
    }
    idxs.reverse();
    let cells: Vec<Cell> = idxs.iter().map(|&i| grid.cell_at_index(i)).collect();
    let diagonals = cells.windows(2).filter(|w| w[0].col != w[1].col && w[0].row != w[1].row).count();
    let straights = cells.len() - 1 - diagonals;
    Ok(GridPath {
        points: cells.iter().map(|&c| grid.center(c)).collect(),
        cost: straights as f64 + diagonals as f64 * SQRT_2,
        cells,
        expanded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn open(w: usize, h: usize) -> OccupancyGrid {
        OccupancyGrid::open(Vec2::ZERO, 1.0, w, h).unwrap()
    }

    /// Plain Dijkstra over cells that counts straight and diagonal moves
    /// separately, so costs compare exactly.
    fn oracle(grid: &OccupancyGrid, s: Cell, t: Cell) -> Option<f64> {
        let n = grid.width() * grid.height();
        let mut best: Vec<Option<(usize, usize)>> = vec![None; n];
        let cost = |p: (usize, usize)| p.0 as f64 + p.1 as f64 * SQRT_2;
        let mut done = vec![false; n];
        best[grid.index(s)] = Some((0, 0));
        loop {
            let mut pick: Option<usize> = None;
            for i in 0..n {
                if let (false, Some(p)) = (done[i], best[i]) {
                    if pick.is_none_or(|j| cost(p) < cost(best[j].unwrap())) {
                        pick = Some(i);
                    }
                }
            }
            let Some(i) = pick else { return None };
            if i == grid.index(t) {
                return best[i].map(cost);
            }
            done[i] = true;
            let (a, b) = best[i].unwrap();
            let c = grid.cell_at_index(i);
            for dc in -1i64..=1 {
                for dr in -1i64..=1 {
                    if dc == 0 && dr == 0 {
                        continue;
                    }
                    let (col, row) = (c.col as i64 + dc, c.row as i64 + dr);
                    if col < 0 || row < 0 || col >= grid.width() as i64 || row >= grid.height() as i64 {
                        continue;
                    }
                    let free = |x: i64, y: i64| grid.is_passable(Cell::new(x as usize, y as usize));
                    if !free(col, row) {
                        continue;
                    }
                    let diag = dc != 0 && dr != 0;
                    if diag && !(free(col, c.row as i64) && free(c.col as i64, row)) {
                        continue;
                    }
                    let cand = if diag { (a, b + 1) } else { (a + 1, b) };
                    let j = grid.index(Cell::new(col as usize, row as usize));
                    if best[j].is_none_or(|p| cost(cand) < cost(p)) {
                        best[j] = Some(cand);
                    }
                }
            }
        }
    }

    #[test]
    fn straight_line() {
        let p = grid_plan(&open(10, 10), Cell::new(0, 0), Cell::new(0, 9)).unwrap();
        assert_eq!(p.cost, 9.0);
        assert_eq!(p.cells.len(), 10);
    }

    #[test]
    fn wall_blocks() {
        let mut g = open(10, 10);
        for row in 0..10 {
            g.set_passable(Cell::new(5, row), false);
        }
        assert_eq!(grid_plan(&g, Cell::new(0, 0), Cell::new(9, 9)), Err(MotionError::NoPath));
        assert_eq!(grid_plan(&g, Cell::new(5, 0), Cell::new(9, 9)), Err(MotionError::StartBlocked));
        assert_eq!(grid_plan(&g, Cell::new(0, 0), Cell::new(5, 9)), Err(MotionError::GoalBlocked));
    }

    #[test]
    fn no_corner_cutting() {
        let mut g = open(2, 2);
        g.set_passable(Cell::new(1, 0), false);
        let p = grid_plan(&g, Cell::new(0, 0), Cell::new(1, 1)).unwrap();
        assert_eq!(p.cost, 2.0);
    }

    #[test]
    fn matches_oracle_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let mut g = open(30, 30);
            for i in 0..900 {
                if rng.random_bool(0.2) {
                    g.set_passable(g.cell_at_index(i), false);
                }
            }
            let s = Cell::new(0, 0);
            let t = Cell::new(29, 29);
            g.set_passable(s, true);
            g.set_passable(t, true);
            let ours = grid_plan(&g, s, t).ok().map(|p| p.cost);
            assert_eq!(ours, oracle(&g, s, t));
        }
    }

    #[test]
    fn heuristic_is_admissible_on_open_grid() {
        let g = open(12, 7);
        for i in 0..84 {
            let c = g.cell_at_index(i);
            let p = grid_plan(&g, Cell::new(3, 3), c).unwrap();
            assert!(octile(Cell::new(3, 3), c) <= p.cost + 1e-12);
            assert!((octile(Cell::new(3, 3), c) - p.cost).abs() < 1e-12);
        }
    }
}
