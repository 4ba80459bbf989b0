use serde::{Deserialize, Serialize};

use crate::geom::Vec2;

use super::{NetworkError, Spline};

/// Integer cell coordinate; `col` grows with x, `row` grows with y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Cell { col, row }
    }
}

/// Axis-aligned grid of square cells, each passable or not.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Vec2,
    cell_size: f64,
    width: usize,
    height: usize,
    passable: Vec<bool>,
}

impl OccupancyGrid {
    /// `passable` is row-major with row 0 at `origin.y`.
    pub fn new(
        origin: Vec2,
        cell_size: f64,
        width: usize,
        height: usize,
        passable: Vec<bool>,
    ) -> Result<Self, NetworkError> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(NetworkError::Grid(format!("cell_size must be positive, got {cell_size}")));
        }
        if width * height != passable.len() {
            return Err(NetworkError::Grid(format!(
                "{width}x{height} grid needs {} cells, got {}",
                width * height,
                passable.len()
            )));
        }
        Ok(OccupancyGrid { origin, cell_size, width, height, passable })
    }

    /// A grid with no cells. Networks used only for routing carry this.
    pub fn empty() -> Self {
        OccupancyGrid { origin: Vec2::ZERO, cell_size: 1.0, width: 0, height: 0, passable: Vec::new() }
    }

    /// All-passable grid.
    pub fn open(origin: Vec2, cell_size: f64, width: usize, height: usize) -> Result<Self, NetworkError> {
        Self::new(origin, cell_size, width, height, vec![true; width * height])
    }

    /// Marks a cell passable iff its center lies within `half_width` of some lane.
    pub fn rasterize_lanes<'a>(
        origin: Vec2,
        cell_size: f64,
        width: usize,
        height: usize,
        lanes: impl IntoIterator<Item = &'a Spline>,
        half_width: f64,
    ) -> Result<Self, NetworkError> {
        let mut grid = Self::new(origin, cell_size, width, height, vec![false; width * height])?;
        let lanes: Vec<&Spline> = lanes.into_iter().collect();
        for row in 0..height {
            for col in 0..width {
                let c = grid.center(Cell::new(col, row));
                if lanes.iter().any(|l| l.nearest(c).distance <= half_width) {
                    grid.passable[row * width + col] = true;
                }
            }
        }
        Ok(grid)
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn passable_cells(&self) -> &[bool] {
        &self.passable
    }

    pub fn is_empty(&self) -> bool {
        self.passable.is_empty()
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_at_index(&self, idx: usize) -> Cell {
        Cell::new(idx % self.width, idx / self.width)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    /// Cells outside the grid are impassable.
    pub fn is_passable(&self, cell: Cell) -> bool {
        self.contains(cell) && self.passable[self.index(cell)]
    }

    pub fn set_passable(&mut self, cell: Cell, passable: bool) {
        let i = self.index(cell);
        self.passable[i] = passable;
    }

    /// Cell containing `p`. Boundaries belong to the higher-index cell.
    pub fn cell_of(&self, p: Vec2) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.cell_size).floor();
        let fy = ((p.y - self.origin.y) / self.cell_size).floor();
        if fx < 0.0 || fy < 0.0 || !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let cell = Cell::new(fx as usize, fy as usize);
        self.contains(cell).then_some(cell)
    }

    pub fn center(&self, cell: Cell) -> Vec2 {
        Vec2::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.cell_size,
            self.origin.y + (cell.row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn is_point_passable(&self, p: Vec2) -> bool {
        self.cell_of(p).is_some_and(|c| self.is_passable(c))
    }

    /// Marks every cell whose center is within `radius` of `center` impassable.
    pub fn block_disc(&mut self, center: Vec2, radius: f64) {
        for row in 0..self.height {
            for col in 0..self.width {
                let cell = Cell::new(col, row);
                if self.center(cell).distance(center) <= radius {
                    self.set_passable(cell, false);
                }
            }
        }
    }

    /// True when every cell the segment touches is passable.
    ///
    /// Grid traversal visits each crossed cell; passing exactly through a cell
    /// corner checks both side cells, so the test is conservative.
    pub fn segment_is_free(&self, a: Vec2, b: Vec2) -> bool {
        let (Some(mut cell), Some(end)) = (self.cell_of(a), self.cell_of(b)) else {
            return false;
        };
        if !self.is_passable(cell) {
            return false;
        }
        let d = b - a;
        let step_x: i64 = if d.x > 0.0 { 1 } else if d.x < 0.0 { -1 } else { 0 };
        let step_y: i64 = if d.y > 0.0 { 1 } else if d.y < 0.0 { -1 } else { 0 };
        let boundary = |idx: usize, step: i64, o: f64| -> f64 {
            let k = if step > 0 { idx as f64 + 1.0 } else { idx as f64 };
            o + k * self.cell_size
        };
        let mut t_max_x = if step_x != 0 {
            (boundary(cell.col, step_x, self.origin.x) - a.x) / d.x
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if step_y != 0 {
            (boundary(cell.row, step_y, self.origin.y) - a.y) / d.y
        } else {
            f64::INFINITY
        };
        let t_delta_x = if step_x != 0 { self.cell_size / d.x.abs() } else { f64::INFINITY };
        let t_delta_y = if step_y != 0 { self.cell_size / d.y.abs() } else { f64::INFINITY };
        let shift = |c: usize, s: i64| -> Option<usize> { c.checked_add_signed(s as isize) };
        let max_steps = self.width + self.height + 2;
        for _ in 0..max_steps {
            if cell == end {
                return true;
            }
            if t_max_x.min(t_max_y) > 1.0 {
                // numerically at the end cell's boundary
                return self.is_passable(end);
            }
            if t_max_x == t_max_y {
                let (Some(nx), Some(ny)) = (shift(cell.col, step_x), shift(cell.row, step_y)) else {
                    return false;
                };
                if !self.is_passable(Cell::new(nx, cell.row)) || !self.is_passable(Cell::new(cell.col, ny)) {
                    return false;
                }
                cell = Cell::new(nx, ny);
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                let Some(nx) = shift(cell.col, step_x) else { return false };
                cell = Cell::new(nx, cell.row);
                t_max_x += t_delta_x;
            } else {
                let Some(ny) = shift(cell.row, step_y) else { return false };
                cell = Cell::new(cell.col, ny);
                t_max_y += t_delta_y;
            }
            if !self.is_passable(cell) {
                return false;
            }
        }
        cell == end
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(rows: &[&str]) -> OccupancyGrid {
        let h = rows.len();
        let w = rows[0].len();
        let cells = rows.iter().flat_map(|r| r.chars().map(|c| c == '1')).collect();
        OccupancyGrid::new(Vec2::ZERO, 1.0, w, h, cells).unwrap()
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(OccupancyGrid::new(Vec2::ZERO, 1.0, 2, 2, vec![true; 3]).is_err());
        assert!(OccupancyGrid::new(Vec2::ZERO, 0.0, 1, 1, vec![true]).is_err());
    }

    #[test]
    fn boundary_points_map_to_higher_cell() {
        let g = OccupancyGrid::open(Vec2::ZERO, 1.0, 4, 4).unwrap();
        assert_eq!(g.cell_of(Vec2::new(1.0, 2.0)), Some(Cell::new(1, 2)));
        assert_eq!(g.cell_of(Vec2::new(0.999, 1.999)), Some(Cell::new(0, 1)));
        assert_eq!(g.cell_of(Vec2::new(4.0, 0.0)), None);
        assert_eq!(g.cell_of(Vec2::new(-0.1, 0.0)), None);
    }

    #[test]
    fn segment_blocked_by_wall() {
        let g = grid_from(&["1111", "1101", "1101", "1111"]);
        assert!(!g.segment_is_free(Vec2::new(0.5, 1.5), Vec2::new(3.5, 1.5)));
        assert!(g.segment_is_free(Vec2::new(0.5, 0.5), Vec2::new(3.5, 0.5)));
        assert!(g.segment_is_free(Vec2::new(1.5, 0.5), Vec2::new(1.5, 3.5)));
    }

    #[test]
    fn corner_crossing_checks_both_sides() {
        // diagonal through the corner between (0,0)-(1,1); (1,0) is blocked
        let g = grid_from(&["10", "11"]);
        assert!(!g.segment_is_free(Vec2::new(0.5, 0.5), Vec2::new(1.5, 1.5)));
    }
}
