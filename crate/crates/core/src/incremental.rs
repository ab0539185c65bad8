//! Incremental exact algorithm.
//!
//! A sample of the points is solved exactly. Any clustering of a sample is a
//! relaxation of the full problem, so the sample's lower bound is valid for
//! the full instance; if the sample optimum's boxes also contain every other
//! point it is optimal for the full instance. Otherwise uncovered points are
//! added to the sample in metric order and the sample is solved again.
//! Every clustering the subproblem solver reports is screened for covering
//! the full instance, which yields upper bounds and lets the loop stop early
//! once the gap closes.

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{HrcpError, Result};
use crate::geometry::{absorb_covered, clustering_covers, Clustering, Instance};
use crate::metrics::{increment_sample, initial_sample, Metric, MetricParams, MetricTable};
use crate::solver::{solve_with, SolveLimits, SolveStatus, SolverOptions};

#[derive(Debug, Clone)]
pub struct IncrementalConfig {
    pub p: usize,
    pub metric: Metric,
    pub metric_params: MetricParams,
    /// Budget for each subproblem solve.
    pub iteration_limits: SolveLimits,
    /// Wall-clock budget for the whole run.
    pub time_budget: Option<Duration>,
    /// Seed each subproblem with the previous clustering, extended greedily
    /// to the new points.
    pub warm_start: bool,
}

impl IncrementalConfig {
    pub fn new(p: usize, metric: Metric) -> Self {
        IncrementalConfig {
            p,
            metric,
            metric_params: MetricParams::default(),
            iteration_limits: SolveLimits::default(),
            time_budget: None,
            warm_start: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(HrcpError::param("p must be at least 1"));
        }
        if self.time_budget.is_some_and(|t| t.is_zero()) {
            return Err(HrcpError::param("time budget must be positive"));
        }
        self.metric_params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncrementalStatus {
    Optimal,
    Feasible,
    NoSolution,
}

impl fmt::Display for IncrementalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IncrementalStatus::Optimal => "Optimal",
            IncrementalStatus::Feasible => "Feasible",
            IncrementalStatus::NoSolution => "NoSolution",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub sample_size: usize,
    pub sub_status: SolveStatus,
    pub sub_lb: f64,
    pub global_lb: f64,
    pub global_ub: f64,
    pub uncovered: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct IncrementalResult {
    pub status: IncrementalStatus,
    /// Best clustering of the full instance found, every point assigned.
    pub clustering: Option<Clustering>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub iterations: usize,
    pub sample_size: usize,
    pub trace: Vec<IterationRecord>,
}

/// If `candidate` (a clustering of part of `instance`) covers every point
/// and beats `current_ub` by more than `tolerance`, returns its span and the
/// clustering with all remaining points absorbed.
pub fn check_and_update_incumbent(
    candidate: &Clustering,
    instance: &Instance,
    current_ub: f64,
    tolerance: f64,
) -> Option<(f64, Clustering)> {
    let span = candidate.total_span();
    if span >= current_ub - tolerance {
        return None;
    }
    if !clustering_covers(candidate, instance).covered {
        return None;
    }
    let full = absorb_covered(candidate, instance).expect("covering clustering absorbs every point");
    Some((span, full))
}

pub fn run(instance: &Instance, config: &IncrementalConfig) -> Result<IncrementalResult> {
    config.validate()?;
    let metrics = MetricTable::build(instance, &config.metric_params)?;
    run_with_metrics(instance, config, &metrics)
}

/// As [`run`], with a precomputed metric table for `instance`.
pub fn run_with_metrics(
    instance: &Instance,
    config: &IncrementalConfig,
    metrics: &MetricTable,
) -> Result<IncrementalResult> {
    config.validate()?;
    if metrics.len() != instance.len() {
        return Err(HrcpError::param("metric table does not match the instance"));
    }
    let start = Instant::now();
    let deadline = config.time_budget.map(|b| start + b);
    let n = instance.len();
    let p = config.p;
    let tol = config.iteration_limits.tolerance;
    let k = config.metric_params.batch_size(n);

    let mut sample = initial_sample(config.metric, metrics, &config.metric_params, p);
    let mut in_sample = vec![false; n];
    for &i in &sample {
        in_sample[i] = true;
    }
    let mut lb = 0.0f64;
    let mut ub = f64::INFINITY;
    let mut incumbent: Option<Clustering> = None;
    let mut previous: Option<Clustering> = None;
    let mut trace = Vec::new();

    let finish = |status, clustering, lb, ub, sample_len, trace: Vec<IterationRecord>| IncrementalResult {
        status,
        clustering,
        lower_bound: lb,
        upper_bound: ub,
        iterations: trace.len(),
        sample_size: sample_len,
        trace,
    };

    loop {
        if incumbent.is_some() && lb >= ub - tol {
            return Ok(finish(IncrementalStatus::Optimal, incumbent, lb, ub, sample.len(), trace));
        }
        let remaining = deadline.map(|dl| dl.saturating_duration_since(Instant::now()));
        if remaining.is_some_and(|r| r.is_zero()) {
            let status = if incumbent.is_some() { IncrementalStatus::Feasible } else { IncrementalStatus::NoSolution };
            return Ok(finish(status, incumbent, lb, ub, sample.len(), trace));
        }

        let sub = instance.subset(&sample)?;
        let full_sample = sample.len() == n;
        let mut limits = config.iteration_limits;
        if full_sample {
            // Nothing left to add, so the last solve may use the whole
            // remaining budget.
            limits.time = remaining;
        } else if let Some(r) = remaining {
            limits.time = Some(limits.time.map_or(r, |t| t.min(r)));
        }
        let warm = match (&previous, config.warm_start) {
            (Some(prev), true) => Some(extend_greedily(prev, instance, &sample, &sub, p)?),
            _ => None,
        };
        if let Some(w) = &warm {
            if let Some((span, full)) = check_and_update_incumbent(&w.remap(&sample), instance, ub, tol) {
                ub = span;
                incumbent = Some(full);
            }
        }

        let options = SolverOptions { limits, warm_start: warm, covered_dominance: true };
        let mut screen = |candidate: &Clustering| {
            if let Some((span, full)) = check_and_update_incumbent(&candidate.remap(&sample), instance, ub, tol) {
                ub = span;
                incumbent = Some(full);
            }
        };
        let outcome = solve_with(&sub, p, &options, &mut screen)?;
        lb = lb.max(outcome.lower_bound);

        let best = outcome.best.as_ref().map(|b| b.remap(&sample));
        let uncovered = match &best {
            Some(b) => clustering_covers(b, instance).uncovered,
            None => (0..n).filter(|&i| !in_sample[i]).collect(),
        };

        if outcome.status == SolveStatus::Optimal && uncovered.is_empty() {
            let best = best.expect("optimal outcome carries a clustering");
            let span = best.total_span();
            let full = absorb_covered(&best, instance)?;
            trace.push(IterationRecord {
                iter: trace.len() + 1,
                sample_size: sample.len(),
                sub_status: outcome.status,
                sub_lb: outcome.lower_bound,
                global_lb: span,
                global_ub: span,
                uncovered: 0,
                elapsed: start.elapsed(),
            });
            return Ok(finish(IncrementalStatus::Optimal, Some(full), span, span, sample.len(), trace));
        }

        trace.push(IterationRecord {
            iter: trace.len() + 1,
            sample_size: sample.len(),
            sub_status: outcome.status,
            sub_lb: outcome.lower_bound,
            global_lb: lb,
            global_ub: ub,
            uncovered: uncovered.len(),
            elapsed: start.elapsed(),
        });

        if full_sample {
            // The full instance could not be solved within budget.
            let status = if incumbent.is_some() { IncrementalStatus::Feasible } else { IncrementalStatus::NoSolution };
            if incumbent.is_some() && lb >= ub - tol {
                return Ok(finish(IncrementalStatus::Optimal, incumbent, lb, ub, sample.len(), trace));
            }
            return Ok(finish(status, incumbent, lb, ub, sample.len(), trace));
        }

        let additions = if uncovered.is_empty() {
            // The best clustering covers everything but is not proven
            // optimal; grow the sample among the points outside it.
            let outside: Vec<usize> = (0..n).filter(|&i| !in_sample[i]).collect();
            increment_sample(config.metric, metrics, &outside, k)?
        } else {
            increment_sample(config.metric, metrics, &uncovered, k)?
        };
        for &i in &additions {
            debug_assert!(!in_sample[i]);
            in_sample[i] = true;
        }
        sample.extend(additions);
        sample.sort_unstable();
        previous = best;
    }
}

/// Extends `previous` (global indices) to a clustering of `sub`, the
/// instance formed by `sample`, by placing every new point in the cluster
/// whose span grows least (lowest index on ties).
fn extend_greedily(
    previous: &Clustering,
    instance: &Instance,
    sample: &[usize],
    sub: &Instance,
    p: usize,
) -> Result<Clustering> {
    let labels = previous.labels(instance.len());
    let mut boxes = previous.boxes().to_vec();
    let mut clusters = vec![Vec::new(); p];
    for (local, &global) in sample.iter().enumerate() {
        let c = match labels[global] {
            Some(c) => c,
            None => {
                let x = instance.point(global);
                let growth = |b: &Option<crate::geometry::ClusterBox>| match b {
                    None => 0.0,
                    Some(b) => {
                        let mut grown = b.clone();
                        grown.extend(x);
                        grown.span() - b.span()
                    }
                };
                let mut best = 0;
                let mut best_growth = f64::INFINITY;
                for (c, b) in boxes.iter().enumerate() {
                    let g = growth(b);
                    if g < best_growth {
                        best_growth = g;
                        best = c;
                    }
                }
                match &mut boxes[best] {
                    Some(b) => b.extend(x),
                    slot @ None => *slot = crate::geometry::ClusterBox::enclosing([x]),
                }
                best
            }
        };
        clusters[c].push(local);
    }
    Clustering::from_members(sub, p, clusters)
}

/// CSV with header
/// `iter,sample_size,sub_status,sub_lb,global_lb,global_ub,uncovered,elapsed_ms`.
pub fn write_trace_csv<W: Write>(trace: &[IterationRecord], mut out: W) -> Result<()> {
    writeln!(out, "iter,sample_size,sub_status,sub_lb,global_lb,global_ub,uncovered,elapsed_ms")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iter,
            r.sample_size,
            r.sub_status,
            r.sub_lb,
            r.global_lb,
            r.global_ub,
            r.uncovered,
            r.elapsed.as_millis()
        )?;
    }
    Ok(())
}
