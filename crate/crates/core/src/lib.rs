//! Distance statistics for directed planar graphs with real edge lengths.
//!
//! The library computes, for every vertex of an embedded planar digraph,
//! its eccentricity, the sum of distances to all other vertices, and the
//! number of vertices within a given distance threshold. Negative arc
//! lengths are allowed as long as no negative cycle exists. The main
//! entry point is [`solver::solve`]; everything else is the machinery it
//! is built from (embedded graphs and their duals, shortest-path trees,
//! additively weighted Voronoi diagrams on pieces of an r-division, and
//! prefix structures that aggregate over dual walks).

pub mod aggregate;
pub mod division;
pub mod exact;
pub mod fileio;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod paths;
pub mod piece;
pub mod solver;
pub mod svg;
pub mod voronoi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-vertex distance statistics on the real (unperturbed) lengths.
///
/// `ecc` is the largest distance from the vertex, `sum` the sum of
/// distances to all vertices, and `count` the number of vertices within
/// the query threshold, the vertex itself included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexStats {
    pub ecc: i64,
    pub sum: i128,
    pub count: u32,
}

/// Errors surfaced by graph construction and the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex, dart or face index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("dart {0} appears twice in the rotation system")]
    DuplicateDart(usize),
    #[error("embedding violates Euler's formula: n={n} m={m} f={f}")]
    EulerViolation { n: usize, m: usize, f: usize },
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("{0}")]
    InvalidWalk(String),
    #[error("walk crosses itself at a dual edge or vertex")]
    CrossingWalk,
    #[error("negative cycle reachable from the source")]
    NegativeCycle,
    #[error("lengths were already perturbed")]
    AlreadyPerturbed,
    #[error("arc length out of supported range: {0}; rescale the input")]
    LengthOverflow(String),
    #[error("site {0} owns no vertex")]
    EmptyCell(usize),
    #[error("site pair ({0}, {1}) is invalid here")]
    InvalidSitePair(usize, usize),
    #[error("root vertex {0} lies outside the piece")]
    RootOutsidePiece(usize),
    #[error("site vertex {0} does not lie on the designated outer face")]
    XNotOnOuterFace(usize),
    #[error("site weights violate the proximity condition: {0}")]
    ConditionViolated(String),
    #[error("graph is not triangulated: face {0} has {1} sides")]
    NotTriangulated(usize, usize),
    #[error("division contract violated: {0}")]
    DivisionContract(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
