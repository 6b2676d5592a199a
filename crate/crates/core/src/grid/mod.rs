//! Occupancy grid: cell lattice, belief updates, file I/O and map metrics.
//!
//! A grid stores one raw occupancy value per cell using the ROS map
//! convention: `-1` for never-observed cells, otherwise an integer
//! occupancy percent in `[0, 100]`. A parallel log-odds layer carries
//! the belief accumulated by [`apply_ray_update`]; for cells touched by
//! it the raw value is always `round(100 * sigmoid(log_odds))`.

mod io;
mod quality;

pub use io::{load_map, save_map};
pub use quality::{
    cell_entropy, coverage_percent, coverage_percent_masked, map_entropy, reachable_mask, rmse,
    ssim, ssim_masked,
};

/// Raw value of a never-observed cell (ROS map convention).
pub const UNKNOWN_RAW: i8 = -1;

/// Integer cell coordinates. `x` is the column, `y` the row; cell
/// (0, 0) sits at the grid origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    /// Euclidean distance to another cell, in cell units.
    pub fn distance_cells(&self, other: Cell) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        (dx * dx + dy * dy).sqrt()
    }

    /// Row-major ordering key `(y, x)`, used for deterministic ties.
    pub fn row_major_key(&self) -> (i32, i32) {
        (self.y, self.x)
    }
}

/// SE(2) pose in world coordinates (meters, radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta }
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Normalize an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * std::f64::consts::PI);
    if a > std::f64::consts::PI {
        a -= 2.0 * std::f64::consts::PI;
    }
    a
}

/// Ternary classification of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

/// Log-odds increments and clamp bounds for the inverse sensor model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogOddsParams {
    /// Added to every traversed cell before the beam endpoint. Negative.
    pub l_free: f64,
    /// Added to the endpoint cell of a hit beam. Positive.
    pub l_occ: f64,
    /// Lower clamp for accumulated log-odds.
    pub l_min: f64,
    /// Upper clamp for accumulated log-odds.
    pub l_max: f64,
}

impl Default for LogOddsParams {
    fn default() -> Self {
        LogOddsParams {
            l_free: -0.85,
            l_occ: 0.85,
            l_min: -4.0,
            l_max: 4.0,
        }
    }
}

impl LogOddsParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.l_free < 0.0) {
            return Err(format!("l_free must be negative, got {}", self.l_free));
        }
        if !(self.l_occ > 0.0) {
            return Err(format!("l_occ must be positive, got {}", self.l_occ));
        }
        if !(self.l_min < self.l_max) {
            return Err(format!(
                "log-odds clamp must satisfy l_min < l_max, got [{}, {}]",
                self.l_min, self.l_max
            ));
        }
        Ok(())
    }
}

pub(crate) fn sigmoid(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

/// 2D occupancy grid with a raw ternary/percent layer and a log-odds
/// belief layer.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    /// Cell edge length in meters.
    resolution: f64,
    /// World pose of cell (0, 0); `theta` is carried through map files
    /// but the lattice is always treated as axis-aligned.
    origin: Pose,
    /// Raw occupancy, row-major: `UNKNOWN_RAW` or 0..=100.
    cells: Vec<i8>,
    /// Accumulated log-odds, row-major. 0.0 until first update.
    log_odds: Vec<f64>,
    /// Raw value strictly below this classifies as `Free`.
    free_threshold: i8,
    /// Raw value strictly above this classifies as `Occupied`.
    occ_threshold: i8,
}

impl OccupancyGrid {
    /// Create an all-unknown grid.
    pub fn new_unknown(width: usize, height: usize, resolution: f64, origin: Pose) -> Self {
        assert!(width > 0 && height > 0, "grid must be non-empty");
        assert!(resolution > 0.0, "resolution must be positive");
        OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells: vec![UNKNOWN_RAW; width * height],
            log_odds: vec![0.0; width * height],
            free_threshold: 20,
            occ_threshold: 65,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Pose {
        self.origin
    }

    /// Classification thresholds `(free, occupied)` on the raw scale.
    pub fn thresholds(&self) -> (i8, i8) {
        (self.free_threshold, self.occ_threshold)
    }

    /// Set classification thresholds; must satisfy `0 <= free < occ <= 100`.
    pub fn set_thresholds(&mut self, free: i8, occ: i8) {
        assert!(
            (0..=100).contains(&free) && (0..=100).contains(&occ) && free < occ,
            "thresholds must satisfy 0 <= free < occ <= 100"
        );
        self.free_threshold = free;
        self.occ_threshold = occ;
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && (cell.x as usize) < self.width && (cell.y as usize) < self.height
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        debug_assert!(self.in_bounds(cell));
        cell.y as usize * self.width + cell.x as usize
    }

    /// Cell at a flat row-major index.
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn raw(&self, cell: Cell) -> i8 {
        self.cells[self.index(cell)]
    }

    /// Author a raw value directly, bypassing the log-odds layer. Used
    /// when building ground-truth maps; `value` must be `UNKNOWN_RAW`
    /// or in `[0, 100]`.
    pub fn set_raw(&mut self, cell: Cell, value: i8) {
        assert!(
            value == UNKNOWN_RAW || (0..=100).contains(&value),
            "raw value must be UNKNOWN or in [0, 100]"
        );
        let i = self.index(cell);
        self.cells[i] = value;
    }

    pub fn log_odds(&self, cell: Cell) -> f64 {
        self.log_odds[self.index(cell)]
    }

    /// Probability that the cell is occupied, in `[0, 1]`.
    ///
    /// Never-observed cells report 0.5 (maximum ignorance). Cells with
    /// accumulated log-odds report `sigmoid(log_odds)` exactly; authored
    /// cells report `raw / 100`.
    pub fn probability(&self, cell: Cell) -> f64 {
        let i = self.index(cell);
        self.probability_at(i)
    }

    #[inline]
    pub(crate) fn probability_at(&self, i: usize) -> f64 {
        let raw = self.cells[i];
        if raw == UNKNOWN_RAW {
            0.5
        } else if self.log_odds[i] != 0.0 {
            sigmoid(self.log_odds[i])
        } else {
            raw as f64 / 100.0
        }
    }

    /// Ternary state of a cell under the grid's thresholds.
    #[inline]
    pub fn state(&self, cell: Cell) -> CellState {
        self.state_at(self.index(cell))
    }

    #[inline]
    pub(crate) fn state_at(&self, i: usize) -> CellState {
        let raw = self.cells[i];
        if raw == UNKNOWN_RAW {
            CellState::Unknown
        } else if raw < self.free_threshold {
            CellState::Free
        } else if raw > self.occ_threshold {
            CellState::Occupied
        } else {
            CellState::Unknown
        }
    }

    /// World coordinates of the cell center.
    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            self.origin.x + (cell.x as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.y as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point. May be out of bounds.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Cell {
        Cell::new(
            ((x - self.origin.x) / self.resolution).floor() as i32,
            ((y - self.origin.y) / self.resolution).floor() as i32,
        )
    }

    pub(crate) fn raw_cells(&self) -> &[i8] {
        &self.cells
    }

    fn apply_log_odds(&mut self, cell: Cell, delta: f64, params: &LogOddsParams) {
        let i = self.index(cell);
        let l = (self.log_odds[i] + delta).clamp(params.l_min, params.l_max);
        self.log_odds[i] = l;
        self.cells[i] = (100.0 * sigmoid(l)).round() as i8;
    }
}

/// Integrate one ray into the belief grid.
///
/// Every cell of `cell_sequence` before the last receives `l_free`; the
/// last cell receives `l_occ` when `hit` is true and `l_free` otherwise
/// (a max-range or truncated beam observes its endpoint as free space).
/// Accumulated log-odds are clamped to `[l_min, l_max]` and the raw
/// layer is re-derived. Out-of-bounds cells are skipped silently.
pub fn apply_ray_update(
    grid: &mut OccupancyGrid,
    cell_sequence: &[Cell],
    hit: bool,
    params: &LogOddsParams,
) {
    let Some((&last, body)) = cell_sequence.split_last() else {
        return;
    };
    for &cell in body {
        if grid.in_bounds(cell) {
            grid.apply_log_odds(cell, params.l_free, params);
        }
    }
    if grid.in_bounds(last) {
        let delta = if hit { params.l_occ } else { params.l_free };
        grid.apply_log_odds(last, delta, params);
    }
}
