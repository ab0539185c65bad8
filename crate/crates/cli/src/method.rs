//! Uniform entry point over the direct exact solve and the incremental
//! variants, shared by `solve` and `bench`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use hrcp_core::incremental::{run_with_metrics, IncrementalConfig, IncrementalStatus, IterationRecord};
use hrcp_core::metrics::{Metric, MetricParams, MetricTable};
use hrcp_core::solver::{solve, SolveLimits};
use hrcp_core::{Clustering, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Branch-and-bound on the full instance.
    Exact,
    Incremental(Metric),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Incremental(m) => m.short_name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("exact") {
            return Ok(Method::Exact);
        }
        match s.parse::<Metric>() {
            Ok(m) => Ok(Method::Incremental(m)),
            Err(_) => bail!("unknown method `{s}` (expected exact, nm, em or dm)"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub metric_params: MetricParams,
    /// Budget for the whole run.
    pub time_limit: Option<Duration>,
    /// Budget for each incremental subproblem.
    pub iter_time_limit: Option<Duration>,
}

#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: Method,
    pub status: String,
    pub optimal: bool,
    pub clustering: Option<Clustering>,
    /// Span of `clustering`, `+inf` without one.
    pub span: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub points_used: usize,
    pub trace: Vec<IterationRecord>,
    pub elapsed: Duration,
}

impl MethodReport {
    /// `(span - lb) / lb`, or `None` when it is undefined (no solution or
    /// `lb == 0`).
    pub fn gap(&self) -> Option<f64> {
        if self.span.is_finite() && self.lower_bound > 0.0 {
            Some(((self.span - self.lower_bound) / self.lower_bound).max(0.0))
        } else {
            None
        }
    }
}

pub fn run_method(instance: &Instance, p: usize, method: Method, opts: &RunOptions) -> Result<MethodReport> {
    let start = Instant::now();
    match method {
        Method::Exact => {
            let limits = SolveLimits { time: opts.time_limit, ..SolveLimits::default() };
            let out = solve(instance, p, &limits, &mut |_| {})?;
            Ok(MethodReport {
                method,
                status: out.status.to_string(),
                optimal: out.is_optimal(),
                span: out.upper_bound,
                lower_bound: out.lower_bound,
                clustering: out.best,
                iterations: 1,
                points_used: instance.len(),
                trace: Vec::new(),
                elapsed: start.elapsed(),
            })
        }
        Method::Incremental(metric) => {
            let metrics = MetricTable::build(instance, &opts.metric_params)?;
            let config = IncrementalConfig {
                metric_params: opts.metric_params,
                iteration_limits: SolveLimits { time: opts.iter_time_limit, ..SolveLimits::default() },
                time_budget: opts.time_limit,
                ..IncrementalConfig::new(p, metric)
            };
            let res = run_with_metrics(instance, &config, &metrics)?;
            Ok(MethodReport {
                method,
                status: res.status.to_string(),
                optimal: res.status == IncrementalStatus::Optimal,
                span: res.upper_bound,
                lower_bound: res.lower_bound,
                clustering: res.clustering,
                iterations: res.iterations,
                points_used: res.sample_size,
                trace: res.trace,
                elapsed: start.elapsed(),
            })
        }
    }
}
