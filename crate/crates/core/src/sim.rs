//! Closed-loop exploration: simulated lidar, belief integration, motion
//! along planned paths, pose-graph growth and the decision loop.
//!
//! One simulation owns all of its state and is single-threaded; many
//! simulations can run concurrently. Poses are ground truth (perfect
//! localization): estimation uncertainty enters only through the Fisher
//! information bookkeeping consumed by the utilities. With the default
//! zero sensor noise a run is bit-reproducible from
//! `(truth, method, config, seed)`.
//!
//! Motion safety: before stepping into a cell without net free
//! evidence the robot takes an extra scan to resolve it, and aborts
//! unless the cell then shows negative log-odds. This keeps the robot
//! off occupied truth cells even when the planner routed through
//! unexplored space.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;
use crate::frontier::{cluster_frontiers, detect_frontier_cells, filter_blacklist, Blacklist};
use crate::graph::{EdgeKind, PoseGraph};
use crate::grid::{
    apply_ray_update, reachable_mask, Cell, CellState, LogOddsParams, OccupancyGrid, Pose,
};
use crate::metrics::{record_tick, ScoreRecord, Trace};
use crate::planner::{plan_path_tolerant, plan_path};
use crate::raycast::bresenham;
use crate::utility::{
    score_candidates, select_ags, select_fd, select_proposed, UtilityParams, MILESTONE_EPS,
};

pub use crate::graph::NoiseModel;

/// Simulated lidar parameters: full-circle fan of evenly spaced beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    pub max_range_m: f64,
    pub beam_count: usize,
    /// Gaussian noise on hit ranges, meters. 0 keeps runs exact.
    pub hit_noise_std: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            max_range_m: 3.0,
            beam_count: 360,
            hit_noise_std: 0.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.max_range_m > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "sensor max range must be positive, got {}",
                self.max_range_m
            )));
        }
        if self.beam_count < 4 {
            return Err(SimError::InvalidConfig(format!(
                "sensor needs at least 4 beams, got {}",
                self.beam_count
            )));
        }
        if self.hit_noise_std < 0.0 {
            return Err(SimError::InvalidConfig("negative sensor noise".into()));
        }
        Ok(())
    }
}

/// One lidar return. `angle` is world-frame; `range_m` is the distance
/// to the struck cell center for hits, to the last traversed cell for
/// beams truncated by map edges or unknown truth cells, and exactly
/// `max_range_m` for misses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamReading {
    pub angle: f64,
    pub range_m: f64,
    pub hit: bool,
}

/// Frontier selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fd,
    Ags,
    Proposed,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Fd => "fd",
            Method::Ags => "ags",
            Method::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fd" => Ok(Method::Fd),
            "ags" => Ok(Method::Ags),
            "proposed" | "our" => Ok(Method::Proposed),
            other => Err(format!("unknown method '{other}' (expected fd, ags or proposed)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the robot start cell is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartPose {
    /// Free truth cell picked deterministically from the run seed.
    Seeded,
    /// First free truth cell in row-major order.
    FirstFree,
    /// Explicit world position; must land on a free truth cell.
    At { x: f64, y: f64 },
}

/// Full simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub sensor: SensorConfig,
    pub log_odds: LogOddsParams,
    pub utility: UtilityParams,
    /// Frontier clusters below this size are ignored.
    pub min_frontier_size: usize,
    /// Blacklist radius for unreachable frontiers (all methods), cells.
    pub unreachable_blacklist_radius_cells: f64,
    /// Blacklist radius for frontiers the FD baseline has reached, cells.
    pub fd_blacklist_radius_cells: f64,
    /// Maximum number of decision ticks.
    pub budget_ticks: usize,
    pub start: StartPose,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sensor: SensorConfig::default(),
            log_odds: LogOddsParams::default(),
            utility: UtilityParams::default(),
            min_frontier_size: 4,
            unreachable_blacklist_radius_cells: 3.0,
            fd_blacklist_radius_cells: 3.0,
            budget_ticks: 150,
            start: StartPose::Seeded,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.sensor.validate()?;
        self.log_odds
            .validate()
            .map_err(SimError::InvalidConfig)?;
        self.utility.validate()?;
        if self.unreachable_blacklist_radius_cells < 0.0 || self.fd_blacklist_radius_cells < 0.0 {
            return Err(SimError::InvalidConfig("blacklist radii must be non-negative".into()));
        }
        Ok(())
    }
}

/// The mutable world state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    pub truth: OccupancyGrid,
    pub belief: OccupancyGrid,
    pub robot_pose: Pose,
    pub graph: PoseGraph,
    pub blacklist: Blacklist,
    pub tick: usize,
    pub rng_seed: u64,
}

/// Terminal condition of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// No frontier clusters remain.
    Completed,
    /// Frontiers remain but none is a usable goal.
    Stuck,
    /// The decision-tick budget ran out first.
    BudgetExhausted,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::Stuck => "stuck",
            RunStatus::BudgetExhausted => "budget-exhausted",
        })
    }
}

/// Result of a finished run: terminal status, final world state and the
/// per-tick trace.
#[derive(Debug, Clone)]
pub struct ExplorationOutcome {
    pub status: RunStatus,
    pub state: SimState,
    pub trace: Trace,
}

/// Cells a beam at `angle` traverses, from the robot cell toward the
/// point `max_range` away. Identical arithmetic on both the sensing and
/// the integration side, so both walk the same cell list.
fn beam_cells(grid: &OccupancyGrid, pose: &Pose, angle: f64, max_range: f64) -> Vec<Cell> {
    let start = grid.world_to_cell(pose.x, pose.y);
    let end = grid.world_to_cell(pose.x + max_range * angle.cos(), pose.y + max_range * angle.sin());
    bresenham(start, end)
}

fn center_distance(grid: &OccupancyGrid, pose: &Pose, cell: Cell) -> f64 {
    let (cx, cy) = grid.cell_center(cell);
    ((cx - pose.x).powi(2) + (cy - pose.y).powi(2)).sqrt()
}

/// Draw from the standard normal (Box-Muller).
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Simulate one full-circle scan against the truth map.
///
/// Each beam marches cell by cell from the robot outward and stops at
/// the first occupied truth cell (hit) or after `max_range_m` (miss).
/// Unknown truth cells and the map edge truncate the beam as a miss at
/// the last traversed cell, so integration never touches unauthored
/// space. The rng is consumed only when `hit_noise_std > 0`.
pub fn lidar_scan<R: Rng>(
    truth: &OccupancyGrid,
    pose: &Pose,
    sensor: &SensorConfig,
    rng: &mut R,
) -> Vec<BeamReading> {
    let mut beams = Vec::with_capacity(sensor.beam_count);
    for k in 0..sensor.beam_count {
        let angle = pose.theta + std::f64::consts::TAU * k as f64 / sensor.beam_count as f64;
        let cells = beam_cells(truth, pose, angle, sensor.max_range_m);
        let mut reading = BeamReading {
            angle,
            range_m: sensor.max_range_m,
            hit: false,
        };
        for (i, &cell) in cells.iter().enumerate() {
            if !truth.in_bounds(cell) || truth.state(cell) == CellState::Unknown {
                reading.range_m = if i == 0 {
                    0.0
                } else {
                    center_distance(truth, pose, cells[i - 1])
                };
                break;
            }
            if truth.state(cell) == CellState::Occupied {
                let mut range = center_distance(truth, pose, cell);
                if sensor.hit_noise_std > 0.0 {
                    range = (range + sensor.hit_noise_std * standard_normal(rng))
                        .clamp(truth.resolution() * 0.5, sensor.max_range_m);
                }
                reading.range_m = range;
                reading.hit = true;
                break;
            }
        }
        beams.push(reading);
    }
    beams
}

/// Fold a scan into the belief grid with the inverse sensor model.
///
/// Must be called with the pose and sensor the scan was taken with:
/// each beam re-walks the same cell list and applies the log-odds
/// update up to the cell whose center distance reaches the reading.
pub fn integrate_scan(
    belief: &mut OccupancyGrid,
    pose: &Pose,
    scan: &[BeamReading],
    sensor: &SensorConfig,
    params: &LogOddsParams,
) {
    for beam in scan {
        let cells = beam_cells(belief, pose, beam.angle, sensor.max_range_m);
        let mut traversed = Vec::with_capacity(cells.len());
        for (i, &cell) in cells.iter().enumerate() {
            traversed.push(cell);
            if i > 0 && center_distance(belief, pose, cell) >= beam.range_m - 1e-9 {
                break;
            }
        }
        if !beam.hit && beam.range_m < sensor.max_range_m {
            // truncated beam: the last cell is unauthored space, leave it
            traversed.pop();
        }
        apply_ray_update(belief, &traversed, beam.hit, params);
    }
}

/// A goal frontier counts as dissolved once every in-bounds neighbor of
/// the centroid has been observed: the unknown region it pointed at has
/// been seen, so traveling further to it is wasted motion.
fn goal_dissolved(belief: &OccupancyGrid, goal: Cell) -> bool {
    for dy in -1..=1 {
        for dx in -1..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nb = Cell::new(goal.x + dx, goal.y + dy);
            if belief.in_bounds(nb) && belief.raw(nb) == crate::grid::UNKNOWN_RAW {
                return false;
            }
        }
    }
    true
}

/// Whether the robot may step onto `cell`: classified free, or observed
/// with net free evidence. Under zero sensor noise, negative log-odds
/// implies the truth cell is free (occupied truth cells only ever
/// receive positive increments), so this rule keeps the robot off
/// obstacles even before a cell accumulates enough evidence to classify.
fn passable(belief: &OccupancyGrid, cell: Cell) -> bool {
    match belief.state(cell) {
        CellState::Free => true,
        CellState::Occupied => false,
        CellState::Unknown => {
            belief.raw(cell) != crate::grid::UNKNOWN_RAW && belief.log_odds(cell) < 0.0
        }
    }
}

fn line_of_sight(belief: &OccupancyGrid, a: Cell, b: Cell) -> bool {
    bresenham(a, b)
        .iter()
        .all(|&c| belief.in_bounds(c) && belief.state(c) != CellState::Occupied)
}

/// Why a motion segment ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvanceOutcome {
    /// Within goal tolerance of the target (or path exhausted).
    Arrived,
    /// The next cell is (or resolved to) an obstacle; replan needed.
    Blocked,
    /// The goal stopped being a frontier cell mid-travel.
    GoalDissolved,
}

/// One exploration run in progress.
pub struct Simulation {
    state: SimState,
    config: SimConfig,
    method: Method,
    rng: ChaCha8Rng,
    trace: Trace,
    truth_mask: Vec<bool>,
    traveled_m: f64,
    /// Cumulative travel distance at which the next pose node appears.
    next_node_at_m: f64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

impl Simulation {
    /// Validate the configuration, place the robot, create the root
    /// pose node and integrate the first scan (recorded as tick 0).
    pub fn new(truth: OccupancyGrid, method: Method, config: SimConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;

        let free_cells: Vec<Cell> = (0..truth.len())
            .filter(|&i| truth.state_at(i) == CellState::Free)
            .map(|i| truth.cell_at(i))
            .collect();
        if free_cells.is_empty() {
            return Err(SimError::NoFreeCell);
        }
        let start_cell = match config.start {
            StartPose::FirstFree => free_cells[0],
            StartPose::Seeded => free_cells[(splitmix64(seed) % free_cells.len() as u64) as usize],
            StartPose::At { x, y } => {
                let c = truth.world_to_cell(x, y);
                if !truth.in_bounds(c) || truth.state(c) != CellState::Free {
                    return Err(SimError::StartNotFree { x: c.x, y: c.y });
                }
                c
            }
        };
        let (sx, sy) = truth.cell_center(start_cell);
        let robot_pose = Pose::new(sx, sy, 0.0);

        let mut belief = OccupancyGrid::new_unknown(
            truth.width(),
            truth.height(),
            truth.resolution(),
            truth.origin(),
        );
        let (ft, ot) = truth.thresholds();
        belief.set_thresholds(ft, ot);

        let mut graph = PoseGraph::new();
        graph.add_node(robot_pose);

        let truth_mask = reachable_mask(&truth);
        let mut sim = Simulation {
            state: SimState {
                truth,
                belief,
                robot_pose,
                graph,
                blacklist: Blacklist::new(),
                tick: 0,
                rng_seed: seed,
            },
            config,
            method,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trace: Trace::new(),
            truth_mask,
            traveled_m: 0.0,
            next_node_at_m: 0.0,
        };
        sim.next_node_at_m = sim.config.utility.node_spacing_m;
        sim.scan_and_integrate();
        sim.record(None);
        Ok(sim)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn traveled_m(&self) -> f64 {
        self.traveled_m
    }

    fn scan_and_integrate(&mut self) {
        let scan = lidar_scan(&self.state.truth, &self.state.robot_pose, &self.config.sensor, &mut self.rng);
        integrate_scan(
            &mut self.state.belief,
            &self.state.robot_pose,
            &scan,
            &self.config.sensor,
            &self.config.log_odds,
        );
    }

    fn record(&mut self, selected: Option<Cell>) {
        record_tick(&mut self.trace, &self.state, &self.truth_mask, self.traveled_m, selected);
    }

    fn robot_cell(&self) -> Cell {
        self.state
            .belief
            .world_to_cell(self.state.robot_pose.x, self.state.robot_pose.y)
    }

    /// Append a pose node at the current pose, chained by an odometry
    /// edge, plus loop-closure edges to every earlier non-adjacent node
    /// within radius that has line of sight in the belief.
    fn add_pose_node(&mut self) {
        let pose = self.state.robot_pose;
        let id = self.state.graph.add_node(pose);
        self.state
            .graph
            .add_edge(id - 1, id, self.config.utility.noise.odometry, EdgeKind::Odometry)
            .expect("sequential odometry edge");
        let new_cell = self.robot_cell();
        for old in 0..id.saturating_sub(1) {
            let old_pose = self.state.graph.nodes[old].pose;
            if old_pose.distance(&pose) > self.config.utility.loop_closure_radius_m {
                continue;
            }
            let old_cell = self.state.belief.world_to_cell(old_pose.x, old_pose.y);
            if line_of_sight(&self.state.belief, old_cell, new_cell) {
                self.state
                    .graph
                    .add_edge(old, id, self.config.utility.noise.loop_closure, EdgeKind::LoopClosure)
                    .expect("loop closure endpoints exist");
            }
        }
    }

    /// Follow a planned cell path toward `goal`.
    ///
    /// Every `node_spacing_m` of cumulative travel appends a pose node
    /// (with a scan); motion stops early when the next cell is blocked,
    /// when the goal dissolves as a frontier, or when the robot gets
    /// within goal tolerance.
    pub fn advance_along(&mut self, path: &[Cell], goal: Cell) -> AdvanceOutcome {
        let spacing = self.config.utility.node_spacing_m;
        let tolerance = self.config.utility.planner.goal_tolerance_cells;
        for i in 1..path.len() {
            let next = path[i];
            if !passable(&self.state.belief, next) {
                if self.state.belief.state(next) == CellState::Occupied {
                    return AdvanceOutcome::Blocked;
                }
                // resolve unexplored space before stepping into it
                self.scan_and_integrate();
                if !passable(&self.state.belief, next) {
                    return AdvanceOutcome::Blocked;
                }
            }
            let (nx, ny) = self.state.belief.cell_center(next);
            let step = ((nx - self.state.robot_pose.x).powi(2) + (ny - self.state.robot_pose.y).powi(2)).sqrt();
            let heading = (ny - self.state.robot_pose.y).atan2(nx - self.state.robot_pose.x);
            self.state.robot_pose = Pose::new(nx, ny, heading);
            self.traveled_m += step;

            if self.traveled_m + MILESTONE_EPS >= self.next_node_at_m {
                self.add_pose_node();
                self.scan_and_integrate();
                self.next_node_at_m =
                    (((self.traveled_m + MILESTONE_EPS) / spacing).floor() + 1.0) * spacing;
                if goal_dissolved(&self.state.belief, goal) {
                    return AdvanceOutcome::GoalDissolved;
                }
            }
            if next.distance_cells(goal) <= tolerance {
                return AdvanceOutcome::Arrived;
            }
        }
        AdvanceOutcome::Arrived
    }

    /// Run one decision tick. Returns the terminal status once the run
    /// is over, `None` while it keeps going.
    pub fn step(&mut self) -> Option<RunStatus> {
        if self.state.tick >= self.config.budget_ticks {
            return Some(RunStatus::BudgetExhausted);
        }
        self.scan_and_integrate();

        let cells = detect_frontier_cells(&self.state.belief);
        let clusters = cluster_frontiers(&cells, self.config.min_frontier_size);
        if clusters.is_empty() {
            return Some(RunStatus::Completed);
        }
        let clusters = filter_blacklist(clusters, &self.state.blacklist);
        if clusters.is_empty() {
            return Some(RunStatus::Stuck);
        }

        let scores = score_candidates(
            &self.state.belief,
            &self.state.graph,
            &self.state.robot_pose,
            &clusters,
            &self.config.utility,
        );
        let tick = self.state.tick + 1;
        for s in &scores {
            self.trace.scores.push(ScoreRecord::from_score(tick, s));
            if !s.reachable {
                self.state
                    .blacklist
                    .push(s.frontier.centroid, self.config.unreachable_blacklist_radius_cells);
            }
        }

        let selected = match self.method {
            Method::Fd => select_fd(&scores),
            Method::Ags => select_ags(&scores),
            Method::Proposed => select_proposed(&scores),
        };
        let Some(selected) = selected else {
            return Some(RunStatus::Stuck);
        };
        let goal = selected.frontier.centroid;

        let path = plan_path_tolerant(
            &self.state.belief,
            self.robot_cell(),
            goal,
            &self.config.utility.planner,
        )
        .expect("selected candidate was scored reachable on this belief");
        let outcome = self.advance_along(&path, goal);
        if self.method == Method::Fd && outcome == AdvanceOutcome::Arrived {
            self.state
                .blacklist
                .push(goal, self.config.fd_blacklist_radius_cells);
        }

        self.state.tick = tick;
        self.record(Some(goal));
        None
    }

    /// Drive [`Simulation::step`] to completion.
    pub fn run(mut self) -> ExplorationOutcome {
        loop {
            if let Some(status) = self.step() {
                return ExplorationOutcome {
                    status,
                    state: self.state,
                    trace: self.trace,
                };
            }
        }
    }
}

/// Convenience wrapper: build a [`Simulation`] and run it to its end.
pub fn run_exploration(
    truth: OccupancyGrid,
    method: Method,
    config: SimConfig,
    seed: u64,
) -> Result<ExplorationOutcome, SimError> {
    Ok(Simulation::new(truth, method, config, seed)?.run())
}

/// Exact shortest path used by external callers that need the same
/// planner the simulator uses; re-exported for convenience.
pub fn plan_path_exact(
    belief: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    params: &crate::planner::PlannerParams,
) -> Option<Vec<Cell>> {
    plan_path(belief, start, goal, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Closed box: occupied ring, free interior.
    fn boxed_room(n: usize, resolution: f64) -> OccupancyGrid {
        let mut g = OccupancyGrid::new_unknown(n, n, resolution, Pose::new(0.0, 0.0, 0.0));
        for i in 0..g.len() {
            let c = g.cell_at(i);
            let edge = c.x == 0 || c.y == 0 || c.x == n as i32 - 1 || c.y == n as i32 - 1;
            g.set_raw(c, if edge { 100 } else { 0 });
        }
        g
    }

    fn open_field(n: usize, resolution: f64) -> OccupancyGrid {
        let mut g = OccupancyGrid::new_unknown(n, n, resolution, Pose::new(0.0, 0.0, 0.0));
        for i in 0..g.len() {
            let c = g.cell_at(i);
            g.set_raw(c, 0);
        }
        g
    }

    #[test]
    fn beams_miss_in_open_space() {
        let truth = open_field(100, 0.1);
        let pose = Pose::new(5.0, 5.0, 0.0);
        let sensor = SensorConfig {
            max_range_m: 2.0,
            beam_count: 16,
            hit_noise_std: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lidar_scan(&truth, &pose, &sensor, &mut rng);
        assert_eq!(scan.len(), 16);
        for b in &scan {
            assert!(!b.hit);
            assert_eq!(b.range_m, 2.0);
        }
    }

    #[test]
    fn beam_hits_wall_due_east() {
        // wall column at x = 3.0m from a robot at the origin-ish cell
        let mut truth = open_field(100, 0.1);
        for y in 0..100 {
            truth.set_raw(Cell::new(80, y), 100);
        }
        let pose = Pose::new(5.05, 5.05, 0.0);
        let sensor = SensorConfig {
            max_range_m: 5.0,
            beam_count: 4,
            hit_noise_std: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lidar_scan(&truth, &pose, &sensor, &mut rng);
        let east = &scan[0];
        assert!(east.hit);
        assert_abs_diff_eq!(east.range_m, 3.0, epsilon = 0.1);
    }

    #[test]
    fn scan_in_closed_box_hits_all_walls_at_hand_ranges() {
        let truth = boxed_room(11, 0.1); // walls at x,y in {0, 10}
        let pose = Pose::new(0.55, 0.55, 0.0); // center cell (5, 5)
        let sensor = SensorConfig {
            max_range_m: 5.0,
            beam_count: 8,
            hit_noise_std: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lidar_scan(&truth, &pose, &sensor, &mut rng);
        for b in &scan {
            assert!(b.hit, "all beams strike the ring");
        }
        // axis beams: 5 cells to the wall center
        assert_abs_diff_eq!(scan[0].range_m, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(scan[2].range_m, 0.5, epsilon = 1e-9);
        // diagonal beams: 5 * sqrt(2) cells
        assert_abs_diff_eq!(scan[1].range_m, 0.5 * std::f64::consts::SQRT_2, epsilon = 1e-9);
    }

    #[test]
    fn integration_moves_cells_toward_truth() {
        let mut truth = open_field(40, 0.1);
        for y in 0..40 {
            truth.set_raw(Cell::new(30, y), 100);
        }
        let pose = Pose::new(1.05, 2.05, 0.0);
        let sensor = SensorConfig {
            max_range_m: 3.0,
            beam_count: 90,
            hit_noise_std: 0.0,
        };
        let mut belief = OccupancyGrid::new_unknown(40, 40, 0.1, Pose::new(0.0, 0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lidar_scan(&truth, &pose, &sensor, &mut rng);
        integrate_scan(&mut belief, &pose, &scan, &sensor, &LogOddsParams::default());

        // one scan leaves net evidence in the right direction
        assert!(belief.log_odds(Cell::new(20, 20)) < 0.0);
        assert!(belief.log_odds(Cell::new(30, 20)) > 0.0);

        // a second identical scan is enough to classify
        integrate_scan(&mut belief, &pose, &scan, &sensor, &LogOddsParams::default());
        assert_eq!(belief.state(Cell::new(20, 20)), CellState::Free);
        assert_eq!(belief.state(Cell::new(30, 20)), CellState::Occupied);
    }

    #[test]
    fn belief_never_contradicts_truth_without_noise() {
        let truth = boxed_room(21, 0.1);
        let outcome = run_exploration(
            truth.clone(),
            Method::Proposed,
            SimConfig {
                budget_ticks: 30,
                ..SimConfig::default()
            },
            7,
        )
        .unwrap();
        for i in 0..truth.len() {
            let c = truth.cell_at(i);
            let (t, b) = (truth.state(c), outcome.state.belief.state(c));
            if b == CellState::Free {
                assert_eq!(t, CellState::Free, "belief frees only truth-free cells at {c:?}");
            }
            if b == CellState::Occupied {
                assert_eq!(t, CellState::Occupied, "belief occupies only truth-occupied cells at {c:?}");
            }
        }
    }

    #[test]
    fn double_scan_doubles_log_odds() {
        let truth = open_field(30, 0.1);
        let pose = Pose::new(1.55, 1.55, 0.0);
        let sensor = SensorConfig {
            max_range_m: 1.0,
            beam_count: 8,
            hit_noise_std: 0.0,
        };
        let params = LogOddsParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lidar_scan(&truth, &pose, &sensor, &mut rng);

        let mut once = OccupancyGrid::new_unknown(30, 30, 0.1, Pose::new(0.0, 0.0, 0.0));
        integrate_scan(&mut once, &pose, &scan, &sensor, &params);
        let mut twice = once.clone();
        integrate_scan(&mut twice, &pose, &scan, &sensor, &params);

        let probe = Cell::new(18, 15); // on the eastern beam
        assert!(once.log_odds(probe) < 0.0);
        assert_abs_diff_eq!(
            twice.log_odds(probe),
            (2.0 * once.log_odds(probe)).max(params.l_min),
            epsilon = 1e-12
        );
    }

    #[test]
    fn one_scan_covers_most_of_a_small_box() {
        let truth = boxed_room(15, 0.1);
        let sim = Simulation::new(truth, Method::Fd, SimConfig::default(), 3).unwrap();
        let rec = &sim.trace().records[0];
        assert!(
            rec.coverage_percent > 95.0,
            "coverage after one scan: {}",
            rec.coverage_percent
        );
        assert_eq!(rec.node_count, 1);
    }

    #[test]
    fn advance_creates_nodes_every_spacing() {
        // long free strip; the goal sits 13m ahead so neither arrival
        // tolerance nor goal dissolution ends the 3m walk early
        let mut truth = OccupancyGrid::new_unknown(180, 9, 0.1, Pose::new(0.0, 0.0, 0.0));
        for i in 0..truth.len() {
            let c = truth.cell_at(i);
            truth.set_raw(c, 0);
        }
        let config = SimConfig {
            start: StartPose::At { x: 1.05, y: 0.45 },
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(truth, Method::Proposed, config, 0).unwrap();
        // straight 3m east: 30 cells
        let path: Vec<Cell> = (10..=40).map(|x| Cell::new(x, 4)).collect();
        let goal = Cell::new(140, 4);
        let outcome = sim.advance_along(&path, goal);
        assert_eq!(outcome, AdvanceOutcome::Arrived);
        assert_eq!(sim.state().graph.node_count(), 4); // root + 3 milestones
        let odo = sim
            .state()
            .graph
            .edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Odometry)
            .count();
        assert_eq!(odo, 3);
    }

    #[test]
    fn looping_path_adds_loop_closure() {
        let truth = open_field(80, 0.1);
        let config = SimConfig {
            start: StartPose::At { x: 2.05, y: 2.05 },
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(truth, Method::Proposed, config, 0).unwrap();
        // out 2.5m east, then back to the start cell
        let mut path: Vec<Cell> = (20..=45).map(|x| Cell::new(x, 20)).collect();
        path.extend((20..45).rev().map(|x| Cell::new(x, 20)));
        let far_goal = Cell::new(75, 75); // never reached, never dissolves
        let _ = sim.advance_along(&path, far_goal);
        assert!(sim
            .state()
            .graph
            .edges
            .iter()
            .any(|e| e.kind == EdgeKind::LoopClosure));
    }

    #[test]
    fn blocked_path_aborts_before_the_obstacle() {
        let mut truth = open_field(40, 0.1);
        for y in 0..40 {
            truth.set_raw(Cell::new(25, y), 100);
        }
        let config = SimConfig {
            start: StartPose::At { x: 1.05, y: 2.05 },
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(truth, Method::Proposed, config, 0).unwrap();
        let path: Vec<Cell> = (10..=30).map(|x| Cell::new(x, 20)).collect();
        let outcome = sim.advance_along(&path, Cell::new(30, 20));
        assert_eq!(outcome, AdvanceOutcome::Blocked);
        let c = sim.robot_cell();
        assert!(c.x < 25, "robot stopped before the wall, at {c:?}");
        assert_eq!(sim.state().truth.state(c), CellState::Free);
    }

    #[test]
    fn budget_zero_exhausts_after_initial_scan() {
        let truth = boxed_room(15, 0.1);
        let outcome = run_exploration(
            truth,
            Method::Fd,
            SimConfig {
                budget_ticks: 0,
                ..SimConfig::default()
            },
            1,
        )
        .unwrap();
        assert_eq!(outcome.status, RunStatus::BudgetExhausted);
        assert_eq!(outcome.trace.records.len(), 1);
        assert!(outcome.trace.records[0].coverage_percent > 0.0);
    }

    #[test]
    fn fully_walled_robot_gets_stuck_or_completes_immediately() {
        // free cell surrounded by walls: nothing to explore beyond one scan
        let mut truth = OccupancyGrid::new_unknown(5, 5, 0.1, Pose::new(0.0, 0.0, 0.0));
        for i in 0..truth.len() {
            let c = truth.cell_at(i);
            truth.set_raw(c, 100);
        }
        truth.set_raw(Cell::new(2, 2), 0);
        let outcome = run_exploration(truth, Method::Fd, SimConfig::default(), 1).unwrap();
        assert_eq!(outcome.status, RunStatus::Completed);
        assert_eq!(outcome.state.tick, 0);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let truth = boxed_room(17, 0.1);
        let config = SimConfig {
            budget_ticks: 25,
            ..SimConfig::default()
        };
        let a = run_exploration(truth.clone(), Method::Proposed, config.clone(), 11).unwrap();
        let b = run_exploration(truth, Method::Proposed, config, 11).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.state.robot_pose, b.state.robot_pose);
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let truth = boxed_room(9, 0.1);
        let bad = SimConfig {
            sensor: SensorConfig {
                max_range_m: -1.0,
                ..SensorConfig::default()
            },
            ..SimConfig::default()
        };
        assert!(matches!(
            Simulation::new(truth, Method::Fd, bad, 0),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn seeded_start_depends_on_seed() {
        let truth = boxed_room(31, 0.1);
        let a = Simulation::new(truth.clone(), Method::Fd, SimConfig::default(), 0).unwrap();
        let b = Simulation::new(truth, Method::Fd, SimConfig::default(), 1).unwrap();
        assert_ne!(a.state().robot_pose, b.state().robot_pose);
    }
}
