//! Benchmark grid runner.
//!
//! A [`BenchSpec`] expands to the cartesian product of generator parameters
//! (in the order n, d, p, s, seed) times the method list. Each cell is run
//! independently, possibly on a worker pool, and rows come back in grid
//! order.

use std::io::Write;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use hrcp_core::instance::{generate, GenParams};
use hrcp_core::metrics::MetricParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::method::{run_method, Method, MethodReport, RunOptions};

pub const CSV_HEADER: &str = "instance,n,d,p,s,seed,method,time_ms,span,lb,gap,iterations,points_used,status";

/// Environment variable capping the number of bench worker threads.
pub const THREADS_ENV: &str = "HRCP_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub p: Vec<usize>,
    pub s: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<String>,
    /// Seconds per cell.
    #[serde(default)]
    pub time_limit: Option<f64>,
    /// Seconds per incremental subproblem.
    #[serde(default)]
    pub iter_time_limit: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
}

impl BenchSpec {
    pub fn from_json(text: &str) -> Result<BenchSpec> {
        let spec: BenchSpec = serde_json::from_str(text).context("invalid bench spec")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.d.is_empty() || self.p.is_empty() || self.s.is_empty() || self.seeds.is_empty() {
            bail!("bench grid lists must be nonempty");
        }
        if self.methods.is_empty() {
            bail!("bench needs at least one method");
        }
        for m in &self.methods {
            m.parse::<Method>()?;
        }
        for (name, v) in [("time_limit", self.time_limit), ("iter_time_limit", self.iter_time_limit)] {
            if v.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
                bail!("{name} must be a positive number of seconds");
            }
        }
        self.run_options().metric_params.validate()?;
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        let defaults = MetricParams::default();
        RunOptions {
            metric_params: MetricParams {
                delta: self.delta,
                alpha: self.alpha.unwrap_or(defaults.alpha),
                beta: self.beta.unwrap_or(defaults.beta),
                k: self.k,
            },
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            iter_time_limit: self.iter_time_limit.map(Duration::from_secs_f64),
        }
    }

    /// Generator parameters in grid order.
    pub fn instances(&self) -> Vec<GenParams> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &d in &self.d {
                for &p in &self.p {
                    for &s in &self.s {
                        for &seed in &self.seeds {
                            out.push(GenParams { d, n, p, s, seed });
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn instance_name(g: &GenParams) -> String {
    format!("n{}_d{}_p{}_s{}_seed{}", g.n, g.d, g.p, g.s, g.seed)
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub params: GenParams,
    pub method: String,
    /// `None` when the cell failed before producing a report.
    pub report: Option<MethodReport>,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn to_csv(&self, include_time: bool) -> String {
        let g = &self.params;
        let mut fields = vec![
            instance_name(g),
            g.n.to_string(),
            g.d.to_string(),
            g.p.to_string(),
            g.s.to_string(),
            g.seed.to_string(),
            self.method.clone(),
        ];
        match &self.report {
            Some(r) => {
                fields.push(if include_time { r.elapsed.as_millis().to_string() } else { String::new() });
                fields.push(r.span.to_string());
                fields.push(r.lower_bound.to_string());
                fields.push(r.gap().map_or_else(|| "inf".to_string(), |g| g.to_string()));
                fields.push(r.iterations.to_string());
                fields.push(r.points_used.to_string());
                fields.push(r.status.clone());
            }
            None => {
                fields.extend([String::new(), "inf".into(), "0".into(), "inf".into(), "0".into(), "0".into()]);
                fields.push("Error".into());
            }
        }
        fields.join(",")
    }
}

fn run_cell(params: GenParams, method: &str, opts: &RunOptions) -> BenchRow {
    let result = (|| -> Result<MethodReport> {
        let method: Method = method.parse()?;
        let generated = generate(&params)?;
        run_method(&generated.instance, params.p, method, opts)
    })();
    match result {
        Ok(report) => BenchRow { params, method: method.to_string(), report: Some(report), error: None },
        Err(e) => BenchRow { params, method: method.to_string(), report: None, error: Some(format!("{e:#}")) },
    }
}

fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&t| t > 0)
}

/// Runs every cell of the grid. Failed cells become `Error` rows.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let opts = spec.run_options();
    let cells: Vec<(GenParams, &str)> =
        spec.instances().into_iter().flat_map(|g| spec.methods.iter().map(move |m| (g, m.as_str()))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_count() {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("could not start bench workers")?;
    Ok(pool.install(|| cells.par_iter().map(|&(g, m)| run_cell(g, m, &opts)).collect()))
}

/// Writes the result table. With `include_time == false` the `time_ms`
/// column is left empty so that output is reproducible byte for byte.
pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W, include_time: bool) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv(include_time))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(methods: &[&str]) -> BenchSpec {
        BenchSpec {
            n: vec![40],
            d: vec![3],
            p: vec![4],
            s: vec![0.1],
            seeds: vec![1],
            methods: methods.iter().map(|m| m.to_string()).collect(),
            time_limit: None,
            iter_time_limit: None,
            delta: None,
            alpha: None,
            beta: None,
            k: None,
        }
    }

    #[test]
    fn exact_and_dm_agree() {
        let rows = run_bench(&spec(&["exact", "dm"])).unwrap();
        assert_eq!(rows.len(), 2);
        let (a, b) = (rows[0].report.as_ref().unwrap(), rows[1].report.as_ref().unwrap());
        assert_eq!(rows[0].method, "exact");
        assert!((a.span - b.span).abs() <= 1e-9);
        assert_eq!(rows[0].to_csv(false).split(',').nth(8), rows[1].to_csv(false).split(',').nth(8));
        assert!(b.points_used <= 40 && b.iterations >= 1);
        assert_eq!((a.iterations, a.points_used), (1, 40));
    }

    #[test]
    fn grid_order_is_stable() {
        let mut s = spec(&["em", "exact"]);
        s.n = vec![20, 10];
        s.seeds = vec![3, 1];
        let names: Vec<String> =
            run_bench(&s).unwrap().iter().map(|r| format!("{}:{}", instance_name(&r.params), r.method)).collect();
        assert_eq!(
            names,
            [
                "n20_d3_p4_s0.1_seed3:em",
                "n20_d3_p4_s0.1_seed3:exact",
                "n20_d3_p4_s0.1_seed1:em",
                "n20_d3_p4_s0.1_seed1:exact",
                "n10_d3_p4_s0.1_seed3:em",
                "n10_d3_p4_s0.1_seed3:exact",
                "n10_d3_p4_s0.1_seed1:em",
                "n10_d3_p4_s0.1_seed1:exact",
            ]
        );
    }

    #[test]
    fn zero_lb_reports_inf_gap() {
        let mut s = spec(&["exact"]);
        s.n = vec![3];
        s.p = vec![3];
        let rows = run_bench(&s).unwrap();
        let line = rows[0].to_csv(false);
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[8], "0");
        assert_eq!(fields[10], "inf");
        assert_eq!(fields[13], "Optimal");
    }

    #[test]
    fn failing_cells_become_rows() {
        let mut s = spec(&["exact"]);
        s.s = vec![0.1, 2.0];
        assert!(run_bench(&s).is_ok());
        let rows = run_bench(&s).unwrap();
        assert!(rows[0].report.is_some());
        assert!(rows[1].to_csv(true).ends_with(",Error"));
    }

    #[test]
    fn spec_validation() {
        assert!(BenchSpec::from_json(r#"{"n":[],"d":[2],"p":[2],"s":[0.1],"seeds":[1],"methods":["exact"]}"#).is_err());
        assert!(BenchSpec::from_json(r#"{"n":[5],"d":[2],"p":[2],"s":[0.1],"seeds":[1],"methods":[]}"#).is_err());
        assert!(BenchSpec::from_json(r#"{"n":[5],"d":[2],"p":[2],"s":[0.1],"seeds":[1],"methods":["cplex"]}"#).is_err());
        assert!(BenchSpec::from_json(r#"{"n":[5],"d":[2],"p":[2],"s":[0.1],"seeds":[1],"methods":["nm"],"bogus":1}"#)
            .is_err());
        let ok = BenchSpec::from_json(
            r#"{"n":[5],"d":[2],"p":[2],"s":[0.1],"seeds":[1],"methods":["nm"],"time_limit":1800,"k":5}"#,
        )
        .unwrap();
        assert_eq!(ok.run_options().time_limit, Some(Duration::from_secs(1800)));
    }

    #[test]
    fn csv_header_schema() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf, true).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
