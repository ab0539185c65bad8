//! Exact optimization for the hyper-rectangular clustering problem with
//! axis-parallel clusters.
//!
//! Points in `R^d` are partitioned into at most `p` clusters so that the sum
//! over clusters of the per-coordinate extents of their bounding boxes (the
//! *total span*) is minimal. The crate provides:
//!
//! * [`geometry`]: points, instances, boxes, clusterings and cover checks.
//! * [`instance`]: a seeded synthetic generator and the text instance format.
//! * [`solver`]: a depth-first branch-and-bound, a brute-force oracle and an
//!   LP-format exporter for the compact mixed-integer model.
//! * [`metrics`]: neighbourhood, eccentricity and distance-eccentricity scores
//!   used to pick which points enter a subproblem.
//! * [`incremental`]: the outer loop that solves growing samples exactly until
//!   a sample optimum covers every point.

pub mod error;
pub mod geometry;
pub mod incremental;
pub mod instance;
pub mod metrics;
pub mod solver;

pub use error::{HrcpError, Result};
pub use geometry::{ClusterBox, Clustering, CoverReport, Instance};

/// Absolute tolerance used for span comparisons (optimality gap, pruning,
/// incumbent improvement).
pub const TOLERANCE: f64 = 1e-9;

/// Absolute slack applied when testing whether a point lies inside a box.
pub const COVER_EPS: f64 = 1e-9;
