//! Error types for the exploration library.

use thiserror::Error;

/// Errors from occupancy-grid I/O and map-level metrics.
#[derive(Debug, Error)]
pub enum MapError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// PGM header or raster could not be parsed.
    #[error("malformed PGM {path}: {reason}")]
    MalformedPgm { path: String, reason: String },

    /// YAML sidecar missing a key or holding an unparsable value.
    #[error("malformed map YAML {path}: {reason}")]
    MalformedYaml { path: String, reason: String },

    /// Two grids that must share a lattice do not.
    #[error("grid dimension mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },

    /// SSIM window is even, too small, or larger than the grid.
    #[error("invalid SSIM window {window} for {width}x{height} grid")]
    InvalidWindow {
        window: usize,
        width: usize,
        height: usize,
    },

    /// Summarizing a trace with no records.
    #[error("trace has no records")]
    EmptyTrace,
}

/// Errors from pose-graph construction and spectral metrics.
#[derive(Debug, Error)]
pub enum GraphError {
    /// Edge information matrix is not symmetric (max asymmetry above 1e-9).
    #[error("edge information matrix is not symmetric")]
    NotSymmetric,

    /// Edge information matrix has a non-positive eigenvalue.
    #[error("edge information matrix is not positive-definite")]
    NotPositiveDefinite,

    /// Edge endpoints are missing or degenerate (self loop).
    #[error("invalid edge {from} -> {to}: {reason}")]
    InvalidEdge {
        from: usize,
        to: usize,
        reason: &'static str,
    },

    /// The operation requires a connected graph.
    #[error("pose graph is disconnected")]
    Disconnected,

    /// The operation requires more nodes than the graph has.
    #[error("pose graph has {got} node(s), operation needs at least {need}")]
    TooFewNodes { need: usize, got: usize },

    /// The operation requires at least one edge.
    #[error("pose graph has no edges")]
    NoEdges,

    /// Factorization of the reduced Laplacian failed on a connected graph.
    #[error("numerical failure factorizing the reduced Laplacian")]
    NumericalFailure,
}

/// Errors from simulation setup and execution.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The truth map has no free cell to place the robot on.
    #[error("truth map has no free cell")]
    NoFreeCell,

    /// A requested start pose does not sit on a free truth cell.
    #[error("start cell ({x}, {y}) is not free in the truth map")]
    StartNotFree { x: i32, y: i32 },

    #[error(transparent)]
    Map(#[from] MapError),
}
