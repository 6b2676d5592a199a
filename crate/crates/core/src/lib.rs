//! Deterministic 2D occupancy-grid exploration simulator.
//!
//! The crate simulates a robot exploring an unknown environment with a
//! simulated lidar, building a belief occupancy grid and an SE(2) pose
//! graph along the way. Frontier goals are selected by one of three
//! strategies:
//!
//! - `fd`: greedy nearest-frontier with a blacklist of reached goals,
//! - `ags`: maximise the weighted spanning-tree count of the predicted
//!   pose graph (D-optimality edge weights),
//! - `proposed`: `ags` plus a normalized path-entropy term that steers
//!   the robot toward frontiers whose straight-line path crosses unknown
//!   space, with an exponential distance decay.
//!
//! Modules map onto the pipeline stages: [`grid`] (occupancy grid, map
//! I/O and map-quality metrics), [`raycast`] (Bresenham tracing and path
//! entropy), [`frontier`] (detection and clustering), [`graph`] (pose
//! graph and spectral connectivity), [`planner`] (Dijkstra grid
//! planning), [`utility`] (candidate scoring and selection), [`sim`]
//! (the closed exploration loop) and [`metrics`] (per-tick records, run
//! summaries and CSV output).
//!
//! Everything is deterministic: a run is a pure function of
//! (truth map, method, config, seed).

pub mod error;
pub mod frontier;
pub mod graph;
pub mod grid;
pub mod metrics;
pub mod planner;
pub mod raycast;
pub mod sim;
pub mod utility;

pub use error::{GraphError, MapError, SimError};
pub use frontier::{cluster_frontiers, detect_frontier_cells, filter_blacklist, Blacklist, FrontierCluster};
pub use graph::{
    algebraic_connectivity, average_degree, edge_d_optimality, graph_uncertainty,
    log_spanning_trees, normalized_tree_connectivity, weighted_laplacian, EdgeKind, NoiseModel,
    PoseEdge, PoseGraph, PoseNode,
};
pub use grid::{
    apply_ray_update, cell_entropy, coverage_percent, load_map, map_entropy, rmse, save_map, ssim,
    ssim_masked, Cell, CellState, LogOddsParams, OccupancyGrid, Pose,
};
pub use metrics::{record_tick, summarize, RunSummary, ScoreRecord, TickRecord, Trace};
pub use planner::{plan_path, plan_path_tolerant, PlannerParams};
pub use raycast::{
    bresenham, normalized_path_entropy, path_cell_count, path_entropy, trace_path, EntropyParams,
    RayPath,
};
pub use sim::{
    integrate_scan, lidar_scan, run_exploration, BeamReading, ExplorationOutcome, Method,
    RunStatus, SensorConfig, SimConfig, SimState, Simulation, StartPose,
};
pub use utility::{
    beta_factor, decay, predict_graph, score_candidates, select_ags, select_fd, select_proposed,
    utility_u1, utility_u2, CandidateScore, UtilityParams,
};
