use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hrcp_core::geometry::validate_clustering;
use hrcp_core::incremental::write_trace_csv;
use hrcp_core::instance::{generate, read_instance, write_instance, write_labels, GenParams};
use hrcp_core::metrics::{MetricParams, MetricTable};
use hrcp_core::solver::export_compact_model;
use hrcp_core::{Clustering, Instance};

use crate::bench::{run_bench, write_csv, BenchSpec};
use crate::method::{run_method, Method, RunOptions};
use crate::plot::plot_svg;

#[derive(Parser, Debug)]
#[command(name = "hrcp", version, about = "Exact axis-parallel hyper-rectangular clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic instance
    Gen(GenArgs),
    /// Solve an instance exactly
    Solve(SolveArgs),
    /// Write the compact MIP model in LP format
    Export(ExportArgs),
    /// Run a benchmark grid and write a CSV table
    Bench(BenchArgs),
    /// Render a 2-D instance (and optionally a solution) as SVG
    Plot(PlotArgs),
    /// Dump the per-point sampling metrics as CSV
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Also write the generator labels to this file
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct MetricArgs {
    /// Neighbourhood radius (default: twice the mean nearest-neighbour distance)
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Points added per increment
    #[arg(long)]
    k: Option<usize>,
}

impl MetricArgs {
    fn params(&self) -> Result<MetricParams> {
        let d = MetricParams::default();
        let params = MetricParams {
            delta: self.delta,
            alpha: self.alpha.unwrap_or(d.alpha),
            beta: self.beta.unwrap_or(d.beta),
            k: self.k,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// exact, nm, em or dm
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    metric: MetricArgs,
    /// Seconds for the whole solve
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    /// Seconds per incremental subproblem
    #[arg(long = "iter-time-limit")]
    iter_time_limit: Option<f64>,
    instance: PathBuf,
    /// Write the solution as JSON
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Write the per-iteration trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    p: usize,
    instance: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Leave the time_ms column empty for byte-reproducible output
    #[arg(long = "no-time")]
    no_time: bool,
}

#[derive(Args, Debug)]
struct PlotArgs {
    instance: PathBuf,
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    instance: PathBuf,
    #[command(flatten)]
    metric: MetricArgs,
    /// Include per-coordinate E_t and D_t columns
    #[arg(long = "per-coordinate")]
    per_coordinate: bool,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

fn seconds(flag: &str, v: Option<f64>) -> Result<Option<Duration>> {
    match v {
        None => Ok(None),
        Some(t) if t > 0.0 && t.is_finite() => Ok(Some(Duration::from_secs_f64(t))),
        Some(t) => bail!("--{flag} must be a positive number of seconds, got {t}"),
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_instance(BufReader::new(f)).with_context(|| format!("cannot read {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let g = generate(&GenParams { d: a.d, n: a.n, p: a.p, s: a.s, seed: a.seed })?;
    let mut w = create(&a.output)?;
    write_instance(&g.instance, &mut w)?;
    w.flush()?;
    if let Some(path) = &a.labels {
        let mut w = create(path)?;
        write_labels(&g.labels, &mut w)?;
        w.flush()?;
    }
    writeln!(out, "wrote {} points in {} dimensions to {}", a.n, a.d, a.output.display())?;
    Ok(())
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let method: Method = a.method.parse()?;
    if a.p == 0 {
        bail!("--p must be at least 1");
    }
    let opts = RunOptions {
        metric_params: a.metric.params()?,
        time_limit: seconds("time-limit", a.time_limit)?,
        iter_time_limit: seconds("iter-time-limit", a.iter_time_limit)?,
    };
    let instance = load_instance(&a.instance)?;
    let report = run_method(&instance, a.p, method, &opts)?;
    if let Some(c) = &report.clustering {
        let violations = validate_clustering(c, &instance, a.p);
        if !violations.is_empty() {
            bail!("internal error: solution failed validation: {violations:?}");
        }
    }
    writeln!(out, "method {method}")?;
    writeln!(out, "status {}", report.status)?;
    writeln!(out, "span {}", report.span)?;
    writeln!(out, "lb {}", report.lower_bound)?;
    writeln!(out, "gap {}", report.gap().map_or_else(|| "inf".to_string(), |g| g.to_string()))?;
    writeln!(out, "iterations {}", report.iterations)?;
    writeln!(out, "points_used {}", report.points_used)?;
    writeln!(out, "time_ms {}", report.elapsed.as_millis())?;
    if let Some(path) = &a.output {
        let Some(c) = &report.clustering else { bail!("no solution found; {} not written", path.display()) };
        fs::write(path, c.to_json()? + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        write_trace_csv(&report.trace, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> Result<()> {
    if a.p == 0 {
        bail!("--p must be at least 1");
    }
    let instance = load_instance(&a.instance)?;
    let mut w = create(&a.output)?;
    let model = export_compact_model(&instance, a.p, &mut w)?;
    w.flush()?;
    writeln!(out, "rows {}", model.rows.len())?;
    writeln!(out, "variables {}", model.variable_count())?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.spec).with_context(|| format!("cannot read {}", a.spec.display()))?;
    let spec = BenchSpec::from_json(&text)?;
    let rows = run_bench(&spec)?;
    let mut w = create(&a.output)?;
    write_csv(&rows, &mut w, !a.no_time)?;
    w.flush()?;
    for row in &rows {
        if let Some(e) = &row.error {
            eprintln!("warning: {} {}: {e}", crate::bench::instance_name(&row.params), row.method);
        }
    }
    writeln!(out, "wrote {} rows to {}", rows.len(), a.output.display())?;
    Ok(())
}

fn cmd_plot(a: PlotArgs, out: &mut dyn Write) -> Result<()> {
    let instance = load_instance(&a.instance)?;
    let clustering = match &a.solution {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let c = Clustering::from_json(&text)?;
            if let Some(bad) = c.clusters().iter().flatten().find(|&&i| i >= instance.len()) {
                bail!("solution refers to point {bad}, instance has {} points", instance.len());
            }
            Some(c)
        }
        None => None,
    };
    let svg = plot_svg(&instance, clustering.as_ref())?;
    fs::write(&a.output, svg).with_context(|| format!("cannot write {}", a.output.display()))?;
    writeln!(out, "wrote {}", a.output.display())?;
    Ok(())
}

fn cmd_metrics(a: MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let instance = load_instance(&a.instance)?;
    let table = MetricTable::build(&instance, &a.metric.params()?)?;
    let mut w = create(&a.output)?;
    table.write_csv(&mut w, a.per_coordinate)?;
    w.flush()?;
    writeln!(out, "delta {}", table.delta())?;
    Ok(())
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `out`. Returns the process exit status.
pub fn run_with_output<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Export(a) => cmd_export(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Plot(a) => cmd_plot(a, out),
        Command::Metrics(a) => cmd_metrics(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    run_with_output(args, &mut lock)
}
