//! SE(2) pose graph and its spectral connectivity metrics.
//!
//! Each edge carries a 3x3 symmetric positive-definite Fisher
//! information matrix. The edge weight used throughout is the
//! D-optimality value: the geometric mean of the information matrix's
//! eigenvalues. The weighted Laplacian built from those weights drives
//! every connectivity metric; spanning-tree quantities are kept in log
//! space because the weighted tree count grows super-exponentially with
//! graph size and overflows raw determinants after a few hundred nodes.

use nalgebra::{DMatrix, Matrix3};

use crate::error::GraphError;
use crate::grid::{normalize_angle, Pose};

/// Maximum tolerated asymmetry of an information matrix.
const SYMMETRY_TOL: f64 = 1e-9;

/// A pose-graph vertex. Ids are dense from 0 in insertion order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseNode {
    pub id: usize,
    pub pose: Pose,
}

/// Edge provenance: sequential motion or a place revisit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Odometry,
    LoopClosure,
}

/// A relative-pose measurement between two nodes with its Fisher
/// information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseEdge {
    pub from: usize,
    pub to: usize,
    pub info: Matrix3<f64>,
    pub kind: EdgeKind,
}

/// Fisher information matrices attached to simulated measurements.
/// Loop closures default to being more informative than odometry.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub odometry: Matrix3<f64>,
    pub loop_closure: Matrix3<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            odometry: Matrix3::from_diagonal(&nalgebra::Vector3::new(100.0, 100.0, 400.0)),
            loop_closure: Matrix3::from_diagonal(&nalgebra::Vector3::new(400.0, 400.0, 1600.0)),
        }
    }
}

/// Undirected pose graph; parallel edges are allowed and accumulate in
/// the Laplacian.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoseGraph {
    pub nodes: Vec<PoseNode>,
    pub edges: Vec<PoseEdge>,
}

impl PoseGraph {
    pub fn new() -> Self {
        PoseGraph::default()
    }

    /// Append a node, normalizing its heading to `(-pi, pi]`.
    pub fn add_node(&mut self, pose: Pose) -> usize {
        let id = self.nodes.len();
        self.nodes.push(PoseNode {
            id,
            pose: Pose::new(pose.x, pose.y, normalize_angle(pose.theta)),
        });
        id
    }

    /// Append an edge after checking endpoints and matrix shape.
    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        info: Matrix3<f64>,
        kind: EdgeKind,
    ) -> Result<(), GraphError> {
        if from == to {
            return Err(GraphError::InvalidEdge {
                from,
                to,
                reason: "self loop",
            });
        }
        if from >= self.nodes.len() || to >= self.nodes.len() {
            return Err(GraphError::InvalidEdge {
                from,
                to,
                reason: "endpoint does not exist",
            });
        }
        if (info - info.transpose()).amax() >= SYMMETRY_TOL {
            return Err(GraphError::NotSymmetric);
        }
        self.edges.push(PoseEdge {
            from,
            to,
            info,
            kind,
        });
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when every node can reach every other through edges.
    /// Graphs with at most one node count as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        if n <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            if a != b {
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root)
    }

    /// Plain-text export, one line per element:
    ///
    /// `VERTEX_SE2 id x y theta`
    /// `EDGE_SE2 from to dx dy dtheta i11 i12 i13 i22 i23 i33`
    ///
    /// The relative measurement `(dx, dy, dtheta)` expresses the `to`
    /// pose in the `from` frame; the information matrix is written as
    /// its upper triangle in row order.
    pub fn to_g2o(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&format!(
                "VERTEX_SE2 {} {:.6} {:.6} {:.6}\n",
                n.id, n.pose.x, n.pose.y, n.pose.theta
            ));
        }
        for e in &self.edges {
            let a = self.nodes[e.from].pose;
            let b = self.nodes[e.to].pose;
            let (sin, cos) = a.theta.sin_cos();
            let (wx, wy) = (b.x - a.x, b.y - a.y);
            let dx = cos * wx + sin * wy;
            let dy = -sin * wx + cos * wy;
            let dth = normalize_angle(b.theta - a.theta);
            let m = &e.info;
            out.push_str(&format!(
                "EDGE_SE2 {} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}\n",
                e.from,
                e.to,
                dx,
                dy,
                dth,
                m[(0, 0)],
                m[(0, 1)],
                m[(0, 2)],
                m[(1, 1)],
                m[(1, 2)],
                m[(2, 2)]
            ));
        }
        out
    }
}

/// D-optimality weight of one edge: the geometric mean of the
/// eigenvalues of its information matrix, `exp(mean(log eig))`.
/// Strictly positive; errors if the matrix is asymmetric or has a
/// non-positive eigenvalue.
pub fn edge_d_optimality(edge: &PoseEdge) -> Result<f64, GraphError> {
    if (edge.info - edge.info.transpose()).amax() >= SYMMETRY_TOL {
        return Err(GraphError::NotSymmetric);
    }
    let eigen = edge.info.symmetric_eigenvalues();
    let mut log_sum = 0.0;
    for k in 0..3 {
        let zeta = eigen[k];
        if zeta <= 0.0 {
            return Err(GraphError::NotPositiveDefinite);
        }
        log_sum += zeta.ln();
    }
    Ok((log_sum / 3.0).exp())
}

/// Weighted graph Laplacian `L = D - A` with D-optimality edge weights.
/// Parallel edges accumulate additively. Symmetric with zero row sums.
pub fn weighted_laplacian(graph: &PoseGraph) -> Result<DMatrix<f64>, GraphError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(GraphError::TooFewNodes { need: 1, got: 0 });
    }
    let mut l = DMatrix::zeros(n, n);
    for e in &graph.edges {
        let w = edge_d_optimality(e)?;
        l[(e.from, e.to)] -= w;
        l[(e.to, e.from)] -= w;
        l[(e.from, e.from)] += w;
        l[(e.to, e.to)] += w;
    }
    Ok(l)
}

/// Natural log of the weighted spanning-tree count `t_w(G)`.
///
/// Computed as the log-determinant of the Laplacian with row/column 0
/// removed, via Cholesky (the reduced Laplacian of a connected graph is
/// positive-definite). For unit weights this equals the log of the
/// spanning-tree count by the Matrix-Tree theorem. Disconnected graphs
/// report [`GraphError::Disconnected`], distinct from numerical failure.
pub fn log_spanning_trees(graph: &PoseGraph) -> Result<f64, GraphError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes { need: 2, got: n });
    }
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let l = weighted_laplacian(graph)?;
    let reduced = l.view((1, 1), (n - 1, n - 1)).into_owned();
    let chol = reduced.cholesky().ok_or(GraphError::NumericalFailure)?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(log_det)
}

/// Algebraic connectivity: the second-smallest eigenvalue of the
/// weighted Laplacian. Non-negative; zero iff the graph is disconnected.
pub fn algebraic_connectivity(graph: &PoseGraph) -> Result<f64, GraphError> {
    let n = graph.node_count();
    if n < 2 {
        return Err(GraphError::TooFewNodes { need: 2, got: n });
    }
    let l = weighted_laplacian(graph)?;
    let mut eig: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eig[1])
}

/// Mean vertex degree `2|E| / |V|`; parallel edges each count.
/// 0.0 for an empty graph.
pub fn average_degree(graph: &PoseGraph) -> f64 {
    if graph.node_count() == 0 {
        return 0.0;
    }
    2.0 * graph.edge_count() as f64 / graph.node_count() as f64
}

/// Normalized tree connectivity: `log t_w(G) / (|V| - 1)`, the log
/// spanning-tree mass per tree edge.
pub fn normalized_tree_connectivity(graph: &PoseGraph) -> Result<f64, GraphError> {
    let n = graph.node_count();
    let log_t = log_spanning_trees(graph)?;
    Ok(log_t / (n as f64 - 1.0))
}

/// Scalar uncertainty of the graph at one instant: the mean edge
/// D-optimality. Errors on an empty edge set.
pub fn graph_uncertainty(graph: &PoseGraph) -> Result<f64, GraphError> {
    if graph.edges.is_empty() {
        return Err(GraphError::NoEdges);
    }
    let mut sum = 0.0;
    for e in &graph.edges {
        sum += edge_d_optimality(e)?;
    }
    Ok(sum / graph.edges.len() as f64)
}
