//! Bresenham line tracing and per-candidate path-entropy quantities.
//!
//! The straight line from the robot to a frontier candidate is scanned
//! cell by cell; each cell contributes a fixed binary entropy depending
//! only on its ternary state. Unknown cells are assigned a low
//! probability (low entropy, high expected information gain), free and
//! occupied cells a near-uniform one. The ray deliberately passes
//! through obstacles: this is a pixel-value scan along the line, not a
//! visibility query (the simulated lidar lives in [`crate::sim`]).

use crate::error::SimError;
use crate::grid::{Cell, CellState, OccupancyGrid};

/// Integer Bresenham line from `start` to `end`, both endpoints
/// included. 8-connected, `max(|dx|, |dy|) + 1` cells. Pure integer
/// arithmetic; callers are responsible for bounds.
pub fn bresenham(start: Cell, end: Cell) -> Vec<Cell> {
    let (mut x, mut y) = (start.x as i64, start.y as i64);
    let (x1, y1) = (end.x as i64, end.y as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;

    let mut cells = Vec::with_capacity(dx.max(-dy) as usize + 1);
    loop {
        cells.push(Cell::new(x as i32, y as i32));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    cells
}

/// Probability assignments for path-entropy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams {
    /// Probability assigned to unknown cells. Default 0.1.
    pub p_unk: f64,
    /// Probability assigned to free and occupied cells. Default 0.45.
    pub p_ofree: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            p_unk: 0.1,
            p_ofree: 0.45,
        }
    }
}

impl EntropyParams {
    /// Both probabilities must be interior points and the unknown
    /// assignment must carry strictly less entropy than the free one.
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.p_unk > 0.0 && self.p_unk < 1.0 && self.p_ofree > 0.0 && self.p_ofree < 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "entropy probabilities must lie in (0, 1), got p_unk={} p_ofree={}",
                self.p_unk, self.p_ofree
            )));
        }
        if crate::grid::cell_entropy(self.p_unk) >= crate::grid::cell_entropy(self.p_ofree) {
            return Err(SimError::InvalidConfig(format!(
                "p_unk={} must have lower binary entropy than p_ofree={}",
                self.p_unk, self.p_ofree
            )));
        }
        Ok(())
    }

    fn probability_for(&self, state: CellState) -> f64 {
        match state {
            CellState::Unknown => self.p_unk,
            CellState::Free | CellState::Occupied => self.p_ofree,
        }
    }
}

/// A traced ray: the Bresenham cells from the robot to a frontier and a
/// snapshot of their states at trace time.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub cells: Vec<Cell>,
    pub values: Vec<CellState>,
}

impl RayPath {
    /// Number of cells on the path, `max(|dx|, |dy|) + 1`.
    pub fn length_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Trace the straight line from `robot` to `frontier` and snapshot the
/// grid states along it. Both cells must be in bounds. `robot ==
/// frontier` yields a single-cell path.
pub fn trace_path(grid: &OccupancyGrid, robot: Cell, frontier: Cell) -> RayPath {
    assert!(grid.in_bounds(robot), "robot cell out of bounds");
    assert!(grid.in_bounds(frontier), "frontier cell out of bounds");
    let cells = bresenham(robot, frontier);
    let values = cells.iter().map(|&c| grid.state(c)).collect();
    RayPath { cells, values }
}

/// Path entropy: the sum over path cells of the binary entropy of the
/// assigned probability (base 2).
pub fn path_entropy(path: &RayPath, params: &EntropyParams) -> f64 {
    path.values
        .iter()
        .map(|&s| crate::grid::cell_entropy(params.probability_for(s)))
        .sum()
}

/// Number of cells on the path (the entropy normalizer).
pub fn path_cell_count(path: &RayPath) -> usize {
    path.cells.len()
}

/// Per-cell normalized path entropy, strictly inside `(0, 1)` for any
/// interior probability assignments.
pub fn normalized_path_entropy(path: &RayPath, params: &EntropyParams) -> f64 {
    path_entropy(path, params) / path_cell_count(path) as f64
}
