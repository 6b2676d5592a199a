//! Frontier candidate scoring and the three goal selectors.
//!
//! For each reachable frontier candidate the pipeline computes:
//!
//! - `E^n`, `K^n`: path entropy and cell count of the straight line
//!   from the robot to the centroid ([`crate::raycast`]),
//! - `gamma^n = exp(-lambda * dist)`: exponential distance decay,
//! - `U1^n`: log weighted spanning-tree count of the pose graph
//!   predicted along the planned path,
//! - `rho^n = 10^beta` with `beta` the decimal digit count of
//!   `floor(|U1|)`, which keeps the entropy term on the same order of
//!   magnitude as the spanning-tree term,
//! - `U2^n = (1 - E/K) * rho + gamma` and `U_tot = U1 + U2`.
//!
//! The selectors share deterministic tie-breaking: smaller distance
//! first, then row-major centroid order.

use crate::frontier::FrontierCluster;
use crate::graph::{EdgeKind, NoiseModel, PoseGraph};
use crate::grid::{Cell, OccupancyGrid, Pose};
use crate::planner::{plan_path_tolerant, PlannerParams};
use crate::raycast::{path_cell_count, path_entropy, trace_path, EntropyParams};

/// Tolerance when testing whether accumulated travel crossed a node
/// spacing milestone, so exact multiples are not lost to float error.
pub(crate) const MILESTONE_EPS: f64 = 1e-9;

/// Parameters of the scoring pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityParams {
    /// Distance decay rate, 1/meters.
    pub lambda_decay: f64,
    pub entropy: EntropyParams,
    /// Spacing between predicted (and real) pose-graph nodes, meters.
    pub node_spacing_m: f64,
    /// Radius for predicted and real loop closures, meters.
    pub loop_closure_radius_m: f64,
    pub noise: NoiseModel,
    pub planner: PlannerParams,
}

impl Default for UtilityParams {
    fn default() -> Self {
        UtilityParams {
            lambda_decay: 0.6,
            entropy: EntropyParams::default(),
            node_spacing_m: 1.0,
            loop_closure_radius_m: 1.5,
            noise: NoiseModel::default(),
            planner: PlannerParams::default(),
        }
    }
}

impl UtilityParams {
    pub fn validate(&self) -> Result<(), crate::error::SimError> {
        if !(self.lambda_decay > 0.0) {
            return Err(crate::error::SimError::InvalidConfig(format!(
                "lambda_decay must be positive, got {}",
                self.lambda_decay
            )));
        }
        if !(self.node_spacing_m > 0.0) || !(self.loop_closure_radius_m > 0.0) {
            return Err(crate::error::SimError::InvalidConfig(
                "node spacing and loop-closure radius must be positive".into(),
            ));
        }
        self.entropy.validate()
    }
}

/// Everything computed for one frontier candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub frontier: FrontierCluster,
    /// Path entropy E^n, bits.
    pub e_n: f64,
    /// Path cell count K^n.
    pub k_n: usize,
    /// Distance decay gamma^n.
    pub gamma_n: f64,
    /// Log weighted spanning-tree count of the predicted graph.
    pub u1: f64,
    /// Decimal digit count of floor(|u1|), minimum 1.
    pub beta: u32,
    /// 10^beta.
    pub rho: f64,
    pub u2: f64,
    pub u_tot: f64,
    /// Euclidean robot-to-centroid distance, meters.
    pub distance_m: f64,
    /// False when the planner found no path; utility fields are zeroed.
    pub reachable: bool,
}

/// Exponential distance decay `gamma = exp(-lambda * distance)`,
/// in `(0, 1]`.
pub fn decay(distance_m: f64, lambda: f64) -> f64 {
    debug_assert!(distance_m >= 0.0);
    (-lambda * distance_m).exp()
}

/// Balancing factor from the spanning-tree utility: `beta` is the
/// number of decimal digits of `floor(|u1|)` (minimum 1, so any
/// `|u1| < 10` yields `beta = 1`), and `rho = 10^beta`.
pub fn beta_factor(u1: f64) -> (u32, f64) {
    assert!(u1.is_finite(), "u1 must be finite");
    let mut n = u1.abs().floor() as u64;
    let mut beta = 1u32;
    while n >= 10 {
        n /= 10;
        beta += 1;
    }
    (beta, 10f64.powi(beta as i32))
}

/// Entropy-side utility `U2 = (1 - e_n/k_n) * rho + gamma`.
pub fn utility_u2(e_n: f64, k_n: usize, rho: f64, gamma: f64) -> f64 {
    debug_assert!(k_n >= 1 && e_n >= 0.0);
    (1.0 - e_n / k_n as f64) * rho + gamma
}

/// Poses at every crossing of a `spacing` milestone along a waypoint
/// polyline, headings taken from the segment being walked. The start
/// waypoint itself never yields a pose.
fn milestone_poses(waypoints: &[Pose], spacing: f64) -> Vec<Pose> {
    let mut out = Vec::new();
    let mut cum = 0.0;
    let mut next_k = 1u64;
    for w in waypoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let step = a.distance(&b);
        if step == 0.0 {
            continue;
        }
        cum += step;
        let heading = (b.y - a.y).atan2(b.x - a.x);
        if cum + MILESTONE_EPS >= next_k as f64 * spacing {
            out.push(Pose::new(b.x, b.y, heading));
            next_k = ((cum + MILESTONE_EPS) / spacing).floor() as u64 + 1;
        }
    }
    out
}

/// Extend a copy of the graph with the pose chain the robot would
/// create by following `planned_path`.
///
/// Hallucinated nodes appear at every `node_spacing_m` of travel and
/// chain to the node nearest the path start with odometry-information
/// edges. Each hallucinated node also receives a predicted loop-closure
/// edge to every pre-existing node within `loop_closure_radius_m`,
/// except its own odometry predecessor. Prediction is purely geometric
/// (no line-of-sight check). An empty or sub-spacing path returns the
/// graph unchanged.
pub fn predict_graph(graph: &PoseGraph, planned_path: &[Pose], params: &UtilityParams) -> PoseGraph {
    let mut predicted = graph.clone();
    if planned_path.is_empty() {
        return predicted;
    }
    let original_count = graph.node_count();

    // chain attachment: the existing node nearest the path start
    let mut prev = graph
        .nodes
        .iter()
        .min_by(|a, b| {
            a.pose
                .distance(&planned_path[0])
                .partial_cmp(&b.pose.distance(&planned_path[0]))
                .unwrap()
                .then(a.id.cmp(&b.id))
        })
        .map(|n| n.id);

    for pose in milestone_poses(planned_path, params.node_spacing_m) {
        let id = predicted.add_node(pose);
        if let Some(p) = prev {
            predicted
                .add_edge(p, id, params.noise.odometry, EdgeKind::Odometry)
                .expect("odometry edge endpoints exist");
        }
        for old in 0..original_count {
            if Some(old) == prev {
                continue;
            }
            if predicted.nodes[old].pose.distance(&pose) <= params.loop_closure_radius_m {
                predicted
                    .add_edge(old, id, params.noise.loop_closure, EdgeKind::LoopClosure)
                    .expect("loop edge endpoints exist");
            }
        }
        prev = Some(id);
    }
    predicted
}

/// Spanning-tree utility of a predicted graph: `log t_w`. A graph with
/// fewer than two nodes has exactly one (trivial) spanning tree, so it
/// scores 0.
pub fn utility_u1(predicted: &PoseGraph) -> Result<f64, crate::error::GraphError> {
    if predicted.node_count() < 2 {
        return Ok(0.0);
    }
    crate::graph::log_spanning_trees(predicted)
}

/// Convert a planned cell path into world-frame poses at cell centers.
fn path_to_poses(grid: &OccupancyGrid, path: &[Cell]) -> Vec<Pose> {
    let mut poses = Vec::with_capacity(path.len());
    let mut heading = 0.0;
    for (i, &c) in path.iter().enumerate() {
        let (x, y) = grid.cell_center(c);
        if i + 1 < path.len() {
            let (nx, ny) = grid.cell_center(path[i + 1]);
            heading = (ny - y).atan2(nx - x);
        }
        poses.push(Pose::new(x, y, heading));
    }
    poses
}

/// Score every frontier candidate against the current belief and graph.
///
/// Unreachable candidates (no tolerant path) keep their entropy and
/// distance fields but carry zeroed utilities and `reachable = false`.
/// Output order follows the input frontier order.
pub fn score_candidates(
    belief: &OccupancyGrid,
    graph: &PoseGraph,
    robot_pose: &Pose,
    frontiers: &[FrontierCluster],
    params: &UtilityParams,
) -> Vec<CandidateScore> {
    let robot_cell = belief.world_to_cell(robot_pose.x, robot_pose.y);
    let mut scores = Vec::with_capacity(frontiers.len());
    for cluster in frontiers {
        let ray = trace_path(belief, robot_cell, cluster.centroid);
        let e_n = path_entropy(&ray, &params.entropy);
        let k_n = path_cell_count(&ray);
        let (cx, cy) = belief.cell_center(cluster.centroid);
        let distance_m = ((cx - robot_pose.x).powi(2) + (cy - robot_pose.y).powi(2)).sqrt();
        let gamma_n = decay(distance_m, params.lambda_decay);

        let planned = plan_path_tolerant(belief, robot_cell, cluster.centroid, &params.planner);
        let score = match planned {
            Some(path) => {
                let poses = path_to_poses(belief, &path);
                let predicted = predict_graph(graph, &poses, params);
                let u1 = utility_u1(&predicted)
                    .expect("predicted graph extends a connected graph by a chain");
                let (beta, rho) = beta_factor(u1);
                let u2 = utility_u2(e_n, k_n, rho, gamma_n);
                CandidateScore {
                    frontier: cluster.clone(),
                    e_n,
                    k_n,
                    gamma_n,
                    u1,
                    beta,
                    rho,
                    u2,
                    u_tot: u1 + u2,
                    distance_m,
                    reachable: true,
                }
            }
            None => CandidateScore {
                frontier: cluster.clone(),
                e_n,
                k_n,
                gamma_n,
                u1: 0.0,
                beta: 0,
                rho: 0.0,
                u2: 0.0,
                u_tot: 0.0,
                distance_m,
                reachable: false,
            },
        };
        scores.push(score);
    }
    scores
}

fn tie_break(a: &CandidateScore, b: &CandidateScore) -> std::cmp::Ordering {
    a.distance_m
        .partial_cmp(&b.distance_m)
        .unwrap()
        .then(a.frontier.centroid.row_major_key().cmp(&b.frontier.centroid.row_major_key()))
}

fn select_max_by_key(
    scores: &[CandidateScore],
    key: impl Fn(&CandidateScore) -> f64,
) -> Option<&CandidateScore> {
    scores
        .iter()
        .filter(|s| s.reachable)
        .min_by(|a, b| {
            // max on key, then the shared tie-break
            key(b).partial_cmp(&key(a)).unwrap().then(tie_break(a, b))
        })
}

/// Proposed selector: argmax `U_tot` over reachable candidates.
/// `None` signals that exploration is complete or stuck.
pub fn select_proposed(scores: &[CandidateScore]) -> Option<&CandidateScore> {
    select_max_by_key(scores, |s| s.u_tot)
}

/// Frontier-detection baseline: nearest reachable candidate.
/// The caller appends the chosen centroid to its blacklist after the
/// robot reaches it.
pub fn select_fd(scores: &[CandidateScore]) -> Option<&CandidateScore> {
    scores
        .iter()
        .filter(|s| s.reachable)
        .min_by(|a, b| tie_break(a, b))
}

/// Active-graph-SLAM baseline: argmax `U1` alone.
pub fn select_ags(scores: &[CandidateScore]) -> Option<&CandidateScore> {
    select_max_by_key(scores, |s| s.u1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decay_values() {
        assert_eq!(decay(0.0, 0.6), 1.0);
        assert_abs_diff_eq!(decay(1.0, 0.6), 0.5488, epsilon = 1e-4);
        assert!(decay(100.0, 0.6) < 1e-20);
        assert!(decay(5.0, 0.6) < decay(4.0, 0.6));
    }

    #[test]
    fn beta_digit_count() {
        assert_eq!(beta_factor(523.7), (3, 1000.0));
        assert_eq!(beta_factor(0.4), (1, 10.0));
        assert_eq!(beta_factor(99.99), (2, 100.0));
        assert_eq!(beta_factor(0.0), (1, 10.0));
        assert_eq!(beta_factor(-523.7), (3, 1000.0));
        assert_eq!(beta_factor(10.0), (2, 100.0));
    }

    #[test]
    fn u2_arithmetic() {
        // zeroed entropy term leaves just gamma
        assert_abs_diff_eq!(utility_u2(4.0, 4, 1000.0, 0.5), 0.5, epsilon = 1e-12);
        // all-unknown single cell: e/k = h(0.1)
        assert_abs_diff_eq!(utility_u2(0.469, 1, 10.0, 1.0), 6.31, epsilon = 0.01);
        // all-free single cell: e/k = h(0.45)
        assert_abs_diff_eq!(utility_u2(0.9928, 1, 10.0, 1.0), 1.072, epsilon = 0.01);
    }

    fn chain_graph() -> PoseGraph {
        let mut g = PoseGraph::new();
        g.add_node(Pose::new(0.0, 0.0, 0.0));
        g
    }

    fn straight_path(len_m: f64, step_m: f64) -> Vec<Pose> {
        let n = (len_m / step_m).round() as usize;
        (0..=n)
            .map(|i| Pose::new(i as f64 * step_m, 0.0, 0.0))
            .collect()
    }

    #[test]
    fn predict_empty_path_is_identity() {
        let g = chain_graph();
        let p = predict_graph(&g, &[], &UtilityParams::default());
        assert_eq!(p, g);
    }

    #[test]
    fn predict_straight_path_adds_chain() {
        let g = chain_graph();
        let params = UtilityParams::default();
        let path = straight_path(3.0, 0.1);
        let p = predict_graph(&g, &path, &params);
        assert_eq!(p.node_count(), 4); // 1 original + 3 hallucinated
        assert_eq!(p.edge_count(), 3);
        assert!(p.edges.iter().all(|e| e.kind == EdgeKind::Odometry));
    }

    #[test]
    fn predict_return_path_closes_loop() {
        let mut g = PoseGraph::new();
        g.add_node(Pose::new(0.0, 0.0, 0.0));
        g.add_node(Pose::new(3.0, 0.0, 0.0));
        g.add_edge(0, 1, NoiseModel::default().odometry, EdgeKind::Odometry)
            .unwrap();
        // robot at node 1; path goes back to node 0's position
        let path: Vec<Pose> = (0..=30)
            .map(|i| Pose::new(3.0 - i as f64 * 0.1, 0.0, 0.0))
            .collect();
        let p = predict_graph(&g, &path, &UtilityParams::default());
        assert!(p
            .edges
            .iter()
            .any(|e| e.kind == EdgeKind::LoopClosure && (e.from == 0 || e.to == 0)));
    }

    #[test]
    fn u1_of_chain_is_zero_and_loop_counts_cycle() {
        let params = UtilityParams {
            noise: NoiseModel {
                odometry: nalgebra::Matrix3::identity(),
                loop_closure: nalgebra::Matrix3::identity(),
            },
            ..UtilityParams::default()
        };
        let g = chain_graph();
        let p = predict_graph(&g, &straight_path(4.0, 0.1), &params);
        assert_abs_diff_eq!(utility_u1(&p).unwrap(), 0.0, epsilon = 1e-9);

        // chain of k edges plus one closure spanning them is a (k+1)-cycle
        // with k+1 spanning trees
        let mut cycle = PoseGraph::new();
        for i in 0..5 {
            cycle.add_node(Pose::new(i as f64, 0.0, 0.0));
        }
        for i in 1..5 {
            cycle
                .add_edge(i - 1, i, nalgebra::Matrix3::identity(), EdgeKind::Odometry)
                .unwrap();
        }
        cycle
            .add_edge(0, 4, nalgebra::Matrix3::identity(), EdgeKind::LoopClosure)
            .unwrap();
        assert_abs_diff_eq!(utility_u1(&cycle).unwrap(), 5.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn u1_single_node_graph_is_zero() {
        assert_eq!(utility_u1(&chain_graph()).unwrap(), 0.0);
    }

    #[test]
    fn milestones_hit_exact_multiples() {
        let poses = straight_path(3.0, 0.1);
        let nodes = milestone_poses(&poses, 1.0);
        assert_eq!(nodes.len(), 3);
        assert_abs_diff_eq!(nodes[0].x, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(nodes[2].x, 3.0, epsilon = 1e-9);
    }

    fn mk_score(centroid: Cell, distance_m: f64, u1: f64, u_tot: f64, reachable: bool) -> CandidateScore {
        CandidateScore {
            frontier: FrontierCluster {
                cells: vec![centroid],
                centroid,
            },
            e_n: 0.0,
            k_n: 1,
            gamma_n: 1.0,
            u1,
            beta: 1,
            rho: 10.0,
            u2: u_tot - u1,
            u_tot,
            distance_m,
            reachable,
        }
    }

    #[test]
    fn proposed_picks_max_and_breaks_ties_by_distance() {
        let scores = vec![
            mk_score(Cell::new(0, 0), 2.0, 0.0, 10.0, true),
            mk_score(Cell::new(5, 0), 3.0, 0.0, 12.5, true),
            mk_score(Cell::new(9, 0), 5.0, 0.0, 12.5, true),
        ];
        let sel = select_proposed(&scores).unwrap();
        assert_eq!(sel.frontier.centroid, Cell::new(5, 0));
    }

    #[test]
    fn fd_picks_nearest_and_tie_breaks_row_major() {
        let scores = vec![
            mk_score(Cell::new(9, 9), 7.0, 0.0, 0.0, true),
            mk_score(Cell::new(3, 1), 2.0, 0.0, 0.0, true),
            mk_score(Cell::new(1, 1), 2.0, 0.0, 0.0, true),
        ];
        let sel = select_fd(&scores).unwrap();
        assert_eq!(sel.frontier.centroid, Cell::new(1, 1));
    }

    #[test]
    fn ags_picks_max_u1() {
        let scores = vec![
            mk_score(Cell::new(0, 0), 2.0, 1.0, 100.0, true),
            mk_score(Cell::new(5, 5), 9.0, 3.0, 4.0, true),
        ];
        let sel = select_ags(&scores).unwrap();
        assert_eq!(sel.frontier.centroid, Cell::new(5, 5));
    }

    #[test]
    fn selectors_skip_unreachable_and_report_none() {
        let scores = vec![
            mk_score(Cell::new(0, 0), 1.0, 9.0, 99.0, false),
            mk_score(Cell::new(5, 5), 9.0, 1.0, 1.0, true),
        ];
        assert_eq!(select_proposed(&scores).unwrap().frontier.centroid, Cell::new(5, 5));
        assert_eq!(select_fd(&scores).unwrap().frontier.centroid, Cell::new(5, 5));

        let none = vec![mk_score(Cell::new(0, 0), 1.0, 0.0, 0.0, false)];
        assert!(select_proposed(&none).is_none());
        assert!(select_fd(&none).is_none());
        assert!(select_ags(&none).is_none());
    }

    #[test]
    fn single_candidate_selects_itself() {
        let scores = vec![mk_score(Cell::new(2, 2), 1.0, 0.5, 6.0, true)];
        assert_eq!(select_proposed(&scores).unwrap().frontier.centroid, Cell::new(2, 2));
        assert_eq!(select_ags(&scores).unwrap().frontier.centroid, Cell::new(2, 2));
        assert_abs_diff_eq!(scores[0].u_tot, scores[0].u1 + scores[0].u2, epsilon = 1e-12);
    }
}
