use std::time::Instant;

use super::{SolveLimits, SolveOutcome, SolveStatus};
use crate::error::{HrcpError, Result};
use crate::geometry::{validate_clustering, ClusterBox, Clustering, Instance};

/// Nodes between two clock reads.
const CLOCK_STRIDE: u64 = 1024;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub limits: SolveLimits,
    /// Initial incumbent. Must be a valid p-clustering of the instance being
    /// solved; it bounds the search but is not reported to the sink.
    pub warm_start: Option<Clustering>,
    /// When the next point already lies inside the box of some cluster, only
    /// branch on the lowest such cluster. Moving a point into a box that
    /// already contains it never increases the span of any completion, so
    /// this keeps the search exact while removing zero-cost duplicate
    /// subtrees.
    pub covered_dominance: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { limits: SolveLimits::default(), warm_start: None, covered_dominance: true }
    }
}

impl From<SolveLimits> for SolverOptions {
    fn from(limits: SolveLimits) -> Self {
        SolverOptions { limits, ..Default::default() }
    }
}

/// Solves HRCP on `instance` with at most `p` clusters.
///
/// Every improving clustering found during the search is passed to `sink`
/// before the call returns, in strictly decreasing span order. The sink runs
/// on the solver's thread and should return quickly.
pub fn solve(
    instance: &Instance,
    p: usize,
    limits: &SolveLimits,
    sink: &mut dyn FnMut(&Clustering),
) -> Result<SolveOutcome> {
    solve_with(instance, p, &SolverOptions::from(*limits), sink)
}

pub fn solve_with(
    instance: &Instance,
    p: usize,
    options: &SolverOptions,
    sink: &mut dyn FnMut(&Clustering),
) -> Result<SolveOutcome> {
    if p == 0 {
        return Err(HrcpError::param("p must be at least 1"));
    }
    let limits = &options.limits;
    if limits.time.is_some_and(|t| t.is_zero()) || limits.nodes == Some(0) {
        return Err(HrcpError::param("solve budgets must be positive"));
    }
    if limits.tolerance.is_nan() || limits.tolerance < 0.0 {
        return Err(HrcpError::param("tolerance must be nonnegative"));
    }
    if let Some(warm) = &options.warm_start {
        let violations = validate_clustering(warm, instance, p);
        if !violations.is_empty() {
            return Err(HrcpError::param(format!("warm start is not a valid clustering: {violations:?}")));
        }
    }

    let mut search = Search::new(instance, p, options, sink);
    let aborted = search.dfs(0);
    let (status, lower_bound) = match aborted {
        None => (SolveStatus::Optimal, search.ub),
        Some(status) => (status, search.frontier_min.min(search.ub)),
    };
    Ok(SolveOutcome { status, lower_bound, upper_bound: search.ub, best: search.best, nodes: search.nodes })
}

/// Branching order: the point farthest from the centroid first, then
/// repeatedly the point whose nearest already-ordered point is farthest.
/// Ties go to the lowest index.
pub fn farthest_point_order(instance: &Instance) -> Vec<usize> {
    let n = instance.len();
    let d = instance.dim();
    let mut centroid = vec![0.0; d];
    for x in instance.points() {
        for t in 0..d {
            centroid[t] += x[t];
        }
    }
    for c in &mut centroid {
        *c /= n as f64;
    }
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();

    let mut first = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, x) in instance.points().enumerate() {
        let dist = sq(x, &centroid);
        if dist > best {
            best = dist;
            first = i;
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut next = first;
    for _ in 0..n {
        order.push(next);
        placed[next] = true;
        let anchor = instance.point(next);
        let mut far = f64::NEG_INFINITY;
        let mut far_idx = usize::MAX;
        for i in 0..n {
            if placed[i] {
                continue;
            }
            nearest[i] = nearest[i].min(sq(instance.point(i), anchor));
            if nearest[i] > far {
                far = nearest[i];
                far_idx = i;
            }
        }
        next = far_idx;
    }
    order
}

/// Total span of a partial clustering given as `(point, cluster)` pairs.
///
/// Because spans only grow as points are added, this is a lower bound on the
/// span of every completion of the partial assignment.
pub fn partial_span_lb(instance: &Instance, assigned: &[(usize, usize)]) -> f64 {
    let mut boxes: Vec<Option<ClusterBox>> = Vec::new();
    for &(i, c) in assigned {
        if c >= boxes.len() {
            boxes.resize(c + 1, None);
        }
        let x = instance.point(i);
        match &mut boxes[c] {
            Some(b) => b.extend(x),
            slot @ None => *slot = ClusterBox::enclosing([x]),
        }
    }
    boxes.iter().flatten().map(ClusterBox::span).sum()
}

struct Search<'a> {
    instance: &'a Instance,
    p: usize,
    d: usize,
    n: usize,
    order: Vec<usize>,
    /// Coordinates permuted into branching order.
    coords: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    size: Vec<usize>,
    used: usize,
    assign: Vec<usize>,
    partial: f64,
    ub: f64,
    best: Option<Clustering>,
    tol: f64,
    dominance: bool,
    nodes: u64,
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
    frontier_min: f64,
    /// Candidate (increase, cluster) pairs, `p + 1` slots per depth.
    cand: Vec<(f64, usize)>,
    /// Saved box bounds of the modified cluster, `2d` slots per depth.
    undo: Vec<f64>,
    sink: &'a mut dyn FnMut(&Clustering),
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, p: usize, options: &SolverOptions, sink: &'a mut dyn FnMut(&Clustering)) -> Self {
        let n = instance.len();
        let d = instance.dim();
        let order = farthest_point_order(instance);
        let coords = order.iter().flat_map(|&i| instance.point(i).iter().copied()).collect();
        let (ub, best) = match &options.warm_start {
            Some(w) => (w.total_span(), Some(w.clone())),
            None => (f64::INFINITY, None),
        };
        Search {
            instance,
            p,
            d,
            n,
            order,
            coords,
            lo: vec![0.0; p * d],
            hi: vec![0.0; p * d],
            size: vec![0; p],
            used: 0,
            assign: vec![0; n],
            partial: 0.0,
            ub,
            best,
            tol: options.limits.tolerance,
            dominance: options.covered_dominance,
            nodes: 0,
            max_nodes: options.limits.nodes,
            deadline: options.limits.time.map(|t| Instant::now() + t),
            frontier_min: f64::INFINITY,
            cand: vec![(0.0, 0); (n + 1) * (p + 1)],
            undo: vec![0.0; n * 2 * d],
            sink,
        }
    }

    fn budget_exhausted(&self) -> Option<SolveStatus> {
        if self.max_nodes.is_some_and(|m| self.nodes >= m) {
            return Some(SolveStatus::NodeLimit);
        }
        if self.nodes.is_multiple_of(CLOCK_STRIDE) && self.deadline.is_some_and(|dl| Instant::now() >= dl) {
            return Some(SolveStatus::TimeLimit);
        }
        None
    }

    fn increase(&self, c: usize, x: &[f64]) -> f64 {
        if self.size[c] == 0 {
            return 0.0;
        }
        let lo = &self.lo[c * self.d..(c + 1) * self.d];
        let hi = &self.hi[c * self.d..(c + 1) * self.d];
        let mut inc = 0.0;
        for t in 0..self.d {
            if x[t] < lo[t] {
                inc += lo[t] - x[t];
            } else if x[t] > hi[t] {
                inc += x[t] - hi[t];
            }
        }
        inc
    }

    /// Explores the subtree below the current partial assignment of the
    /// first `depth` points. Returns the limit status if the budget ran out.
    fn dfs(&mut self, depth: usize) -> Option<SolveStatus> {
        if let Some(status) = self.budget_exhausted() {
            self.frontier_min = self.frontier_min.min(self.partial);
            return Some(status);
        }
        self.nodes += 1;
        if depth == self.n {
            self.record_leaf();
            return None;
        }

        let d = self.d;
        let base = depth * (self.p + 1);
        let mut count = 0;
        {
            let x = &self.coords[depth * d..(depth + 1) * d];
            let covering = if self.dominance { (0..self.used).find(|&c| self.increase(c, x) == 0.0) } else { None };
            if let Some(c) = covering {
                self.cand[base] = (0.0, c);
                count = 1;
            } else {
                for c in 0..self.used {
                    self.cand[base + count] = (self.increase(c, x), c);
                    count += 1;
                }
                if self.used < self.p {
                    self.cand[base + count] = (0.0, self.used);
                    count += 1;
                }
                self.cand[base..base + count].sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            }
        }

        for k in 0..count {
            let (inc, c) = self.cand[base + k];
            if self.partial + inc >= self.ub - self.tol {
                continue;
            }
            let saved_partial = self.partial;
            let fresh = self.size[c] == 0;
            self.apply(depth, c, inc);
            let aborted = self.dfs(depth + 1);
            self.revert(depth, c, fresh, saved_partial);
            if let Some(status) = aborted {
                for j in k + 1..count {
                    let (inc, _) = self.cand[base + j];
                    if self.partial + inc < self.ub - self.tol {
                        self.frontier_min = self.frontier_min.min(self.partial + inc);
                    }
                }
                return Some(status);
            }
        }
        None
    }

    fn apply(&mut self, depth: usize, c: usize, inc: f64) {
        let d = self.d;
        let x = &self.coords[depth * d..(depth + 1) * d];
        let slot = depth * 2 * d;
        let (lo, hi) = (&mut self.lo[c * d..(c + 1) * d], &mut self.hi[c * d..(c + 1) * d]);
        self.undo[slot..slot + d].copy_from_slice(lo);
        self.undo[slot + d..slot + 2 * d].copy_from_slice(hi);
        if self.size[c] == 0 {
            lo.copy_from_slice(x);
            hi.copy_from_slice(x);
            self.used += 1;
        } else {
            for t in 0..d {
                lo[t] = lo[t].min(x[t]);
                hi[t] = hi[t].max(x[t]);
            }
        }
        self.size[c] += 1;
        self.assign[depth] = c;
        self.partial += inc;
    }

    fn revert(&mut self, depth: usize, c: usize, fresh: bool, saved_partial: f64) {
        let d = self.d;
        let slot = depth * 2 * d;
        self.lo[c * d..(c + 1) * d].copy_from_slice(&self.undo[slot..slot + d]);
        self.hi[c * d..(c + 1) * d].copy_from_slice(&self.undo[slot + d..slot + 2 * d]);
        self.size[c] -= 1;
        if fresh {
            self.used -= 1;
        }
        self.partial = saved_partial;
    }

    fn record_leaf(&mut self) {
        let mut clusters = vec![Vec::new(); self.p];
        for (pos, &c) in self.assign.iter().enumerate() {
            clusters[c].push(self.order[pos]);
        }
        for members in &mut clusters {
            members.sort_unstable();
        }
        let clustering =
            Clustering::from_members(self.instance, self.p, clusters).expect("search assignment is in range");
        let span = clustering.total_span();
        if span < self.ub - self.tol {
            self.ub = span;
            (self.sink)(&clustering);
            self.best = Some(clustering);
        }
    }
}
