//! Exact solvers for a single (sub)instance.
//!
//! [`solve`] is a depth-first branch-and-bound over point-to-cluster
//! assignments; [`brute_force`] enumerates every set partition and serves as
//! an oracle for small instances; [`export_compact_model`] writes the compact
//! mixed-integer model in LP text format for external solvers.

mod bnb;
mod brute;
mod export;

use std::fmt;
use std::time::Duration;

pub use bnb::{farthest_point_order, partial_span_lb, solve, solve_with, SolverOptions};
pub use brute::{brute_force, BRUTE_FORCE_MAX_POINTS};
pub use export::{compact_model, export_compact_model, LpModel, LpRow, RowSense};

use crate::geometry::Clustering;
use crate::TOLERANCE;

/// Budgets for a single solve. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
    /// Absolute span gap below which the incumbent is accepted as optimal.
    pub tolerance: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { time: None, nodes: None, tolerance: TOLERANCE }
    }
}

impl SolveLimits {
    pub fn with_time(mut self, time: Duration) -> Self {
        self.time = Some(time);
        self
    }

    pub fn with_nodes(mut self, nodes: u64) -> Self {
        self.nodes = Some(nodes);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::TimeLimit => "TimeLimit",
            SolveStatus::NodeLimit => "NodeLimit",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best: Option<Clustering>,
    /// Valid lower bound on the optimum of the solved instance.
    pub lower_bound: f64,
    /// Span of `best`, or `+inf` if no clustering was found.
    pub upper_bound: f64,
    pub nodes: u64,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
