//! Dijkstra grid planning with obstacle inflation.
//!
//! Plans over cells that are free or unknown in the belief grid
//! (unknown space must be traversable for planning, otherwise no
//! frontier is ever reachable), excluding cells within the inflation
//! radius of any occupied cell. 8-connected moves cost 1 along axes and
//! sqrt(2) along diagonals. The start cell is always admitted even when
//! inflated, so a robot hugging a wall can still leave it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{Cell, CellState, OccupancyGrid};

/// Planning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerParams {
    /// Cells within this Euclidean radius (in cells) of an occupied
    /// cell are untraversable.
    pub inflation_radius_cells: f64,
    /// Arriving within this many cells of the goal counts as reaching it.
    pub goal_tolerance_cells: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            inflation_radius_cells: 1.0,
            goal_tolerance_cells: 2.0,
        }
    }
}

/// Per-cell mask of cells blocked by obstacle inflation.
pub fn inflation_mask(grid: &OccupancyGrid, radius_cells: f64) -> Vec<bool> {
    let (w, h) = (grid.width() as i32, grid.height() as i32);
    let mut mask = vec![false; grid.len()];
    if radius_cells < 0.0 {
        return mask;
    }
    let r = radius_cells.floor() as i32;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64).sqrt() <= radius_cells {
                offsets.push((dx, dy));
            }
        }
    }
    for i in 0..grid.len() {
        if grid.state_at(i) != CellState::Occupied {
            continue;
        }
        let c = grid.cell_at(i);
        for &(dx, dy) in &offsets {
            let (x, y) = (c.x + dx, c.y + dy);
            if x >= 0 && y >= 0 && x < w && y < h {
                mask[y as usize * w as usize + x as usize] = true;
            }
        }
    }
    mask
}

#[derive(PartialEq)]
struct QueueItem {
    cost: f64,
    index: usize,
}

impl Eq for QueueItem {}

impl Ord for QueueItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, index); index tie-break keeps pops deterministic
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for QueueItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn dijkstra(
    grid: &OccupancyGrid,
    start: Cell,
    is_goal: impl Fn(Cell) -> bool,
    params: &PlannerParams,
) -> Option<Vec<Cell>> {
    if !grid.in_bounds(start) || grid.state(start) != CellState::Free {
        return None;
    }
    let blocked = inflation_mask(grid, params.inflation_radius_cells);
    let start_idx = grid.index(start);
    let n = grid.len();
    let (w, h) = (grid.width() as i32, grid.height() as i32);

    let traversable = |idx: usize| -> bool {
        idx == start_idx || (!blocked[idx] && grid.state_at(idx) != CellState::Occupied)
    };

    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start_idx] = 0.0;
    heap.push(QueueItem {
        cost: 0.0,
        index: start_idx,
    });

    let mut goal_idx = None;
    while let Some(QueueItem { cost, index }) = heap.pop() {
        if settled[index] {
            continue;
        }
        settled[index] = true;
        let cell = grid.cell_at(index);
        if is_goal(cell) {
            goal_idx = Some(index);
            break;
        }
        for dy in -1..=1i32 {
            for dx in -1..=1i32 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (cell.x + dx, cell.y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let ni = ny as usize * w as usize + nx as usize;
                if settled[ni] || !traversable(ni) {
                    continue;
                }
                let step = if dx != 0 && dy != 0 { SQRT_2 } else { 1.0 };
                let nd = cost + step;
                if nd < dist[ni] {
                    dist[ni] = nd;
                    prev[ni] = index;
                    heap.push(QueueItem {
                        cost: nd,
                        index: ni,
                    });
                }
            }
        }
    }

    let goal_idx = goal_idx?;
    let mut path = Vec::new();
    let mut i = goal_idx;
    loop {
        path.push(grid.cell_at(i));
        if i == start_idx {
            break;
        }
        i = prev[i];
    }
    path.reverse();
    Some(path)
}

/// Shortest 8-connected path from `start` to exactly `goal`, or `None`
/// when unreachable. The start must be free in the belief.
pub fn plan_path(
    grid: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    params: &PlannerParams,
) -> Option<Vec<Cell>> {
    dijkstra(grid, start, |c| c == goal, params)
}

/// Shortest path to any traversable cell within the goal tolerance of
/// `goal`. Used for frontier goals whose exact centroid may sit inside
/// the inflation band.
pub fn plan_path_tolerant(
    grid: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    params: &PlannerParams,
) -> Option<Vec<Cell>> {
    let tol = params.goal_tolerance_cells;
    dijkstra(grid, start, |c| c.distance_cells(goal) <= tol, params)
}

/// Metric length of a cell path: steps of `resolution` along axes and
/// `resolution * sqrt(2)` along diagonals.
pub fn path_length_m(path: &[Cell], resolution: f64) -> f64 {
    path.windows(2)
        .map(|w| {
            let (dx, dy) = ((w[1].x - w[0].x).abs(), (w[1].y - w[0].y).abs());
            if dx != 0 && dy != 0 {
                resolution * SQRT_2
            } else {
                resolution
            }
        })
        .sum()
}
