//! Point scores used to choose which points enter a subproblem.
//!
//! All scores derive from the Euclidean ball neighbourhood
//! `N(x) = { y != x : |x - y| <= delta }`, split per coordinate into the
//! lower side `N-_t(x) = { y : y_t <= x_t }` and the upper side
//! `N+_t(x) = { y : y_t > x_t }`.
//!
//! * neighbourhood (NM): `|N(x)|`; few neighbours suggests a border point.
//! * eccentricity (EM): `E_t(x) = max(|N-_t|, |N+_t|) / |N|`, `E = max_t E_t`,
//!   and `E_t = 1` for isolated points.
//! * distance-eccentricity (DM): `D_t(x) = |dist_t(x, N-_t) - dist_t(x, N+_t)|`
//!   with `dist_t` the mean absolute coordinate-`t` offset (zero over an empty
//!   side), and `D = max_t D_t`.
//!
//! None of the scores depend on the current sample, so they are computed once
//! per instance.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{HrcpError, Result};
use crate::geometry::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Neighbourhood,
    Eccentricity,
    DistanceEccentricity,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Neighbourhood, Metric::Eccentricity, Metric::DistanceEccentricity];

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::Neighbourhood => "nm",
            Metric::Eccentricity => "em",
            Metric::DistanceEccentricity => "dm",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Metric {
    type Err = HrcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nm" => Ok(Metric::Neighbourhood),
            "em" => Ok(Metric::Eccentricity),
            "dm" => Ok(Metric::DistanceEccentricity),
            other => Err(HrcpError::param(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    /// Neighbourhood radius; `None` picks twice the mean nearest-neighbour
    /// distance.
    pub delta: Option<f64>,
    /// Initial-sample factor for NM, `>= 1`.
    pub alpha: f64,
    /// Initial-sample fraction for EM and DM, in `[0, 1]`.
    pub beta: f64,
    /// Points added per increment; `None` means `max(10, ceil(0.05 n))`.
    pub k: Option<usize>,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { delta: None, alpha: 1.2, beta: 0.9, k: None }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(delta) = self.delta {
            if !(delta.is_finite() && delta > 0.0) {
                return Err(HrcpError::param(format!("delta must be positive, got {delta}")));
            }
        }
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(HrcpError::param(format!("alpha must be at least 1, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(HrcpError::param(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.k == Some(0) {
            return Err(HrcpError::param("k must be at least 1"));
        }
        Ok(())
    }

    pub fn batch_size(&self, n: usize) -> usize {
        self.k.unwrap_or_else(|| 10.max(n.div_ceil(20)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourhoodTable {
    dim: usize,
    delta: f64,
    neighbours: Vec<Vec<usize>>,
    /// `|N-_t(i)|` at `i * dim + t`.
    lower: Vec<usize>,
    /// `|N+_t(i)|` at `i * dim + t`.
    upper: Vec<usize>,
}

impl NeighbourhoodTable {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.neighbours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbours.is_empty()
    }

    /// Sorted neighbour indices of point `i`.
    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn count(&self, i: usize) -> usize {
        self.neighbours[i].len()
    }

    pub fn lower_count(&self, i: usize, t: usize) -> usize {
        self.lower[i * self.dim + t]
    }

    pub fn upper_count(&self, i: usize, t: usize) -> usize {
        self.upper[i * self.dim + t]
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// All-pairs neighbourhoods at radius `delta` (inclusive).
pub fn build_neighbourhoods(instance: &Instance, delta: f64) -> Result<NeighbourhoodTable> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(HrcpError::param(format!("delta must be positive, got {delta}")));
    }
    let n = instance.len();
    let dim = instance.dim();
    let mut neighbours = vec![Vec::new(); n];
    for i in 0..n {
        let xi = instance.point(i);
        for j in i + 1..n {
            // One distance per pair keeps the relation symmetric.
            if distance(xi, instance.point(j)) <= delta {
                neighbours[i].push(j);
                neighbours[j].push(i);
            }
        }
    }
    let mut lower = vec![0; n * dim];
    let mut upper = vec![0; n * dim];
    for (i, list) in neighbours.iter().enumerate() {
        let xi = instance.point(i);
        for &j in list {
            let xj = instance.point(j);
            for t in 0..dim {
                if xj[t] <= xi[t] {
                    lower[i * dim + t] += 1;
                } else {
                    upper[i * dim + t] += 1;
                }
            }
        }
    }
    Ok(NeighbourhoodTable { dim, delta, neighbours, lower, upper })
}

/// Twice the mean nearest-neighbour distance. Coincident points are ignored;
/// falls back to `1.0` when every point coincides or `n == 1`.
pub fn default_delta(instance: &Instance) -> f64 {
    let n = instance.len();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        let xi = instance.point(i);
        let nearest = (0..n)
            .filter(|&j| j != i)
            .map(|j| distance(xi, instance.point(j)))
            .filter(|&dist| dist > 0.0)
            .fold(f64::INFINITY, f64::min);
        if nearest.is_finite() {
            sum += nearest;
            count += 1;
        }
    }
    if count == 0 {
        1.0
    } else {
        2.0 * sum / count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    dim: usize,
    delta: f64,
    count: Vec<usize>,
    ecc_t: Vec<f64>,
    ecc: Vec<f64>,
    dist_ecc_t: Vec<f64>,
    dist_ecc: Vec<f64>,
}

impl MetricTable {
    pub fn build(instance: &Instance, params: &MetricParams) -> Result<MetricTable> {
        params.validate()?;
        let delta = params.delta.unwrap_or_else(|| default_delta(instance));
        let table = build_neighbourhoods(instance, delta)?;
        Ok(Self::from_neighbourhoods(instance, &table))
    }

    pub fn from_neighbourhoods(instance: &Instance, table: &NeighbourhoodTable) -> MetricTable {
        let (ecc_t, ecc) = eccentricity(table);
        let (dist_ecc_t, dist_ecc) = distance_eccentricity(instance, table);
        MetricTable {
            dim: table.dim,
            delta: table.delta,
            count: table.neighbours.iter().map(Vec::len).collect(),
            ecc_t,
            ecc,
            dist_ecc_t,
            dist_ecc,
        }
    }

    pub fn len(&self) -> usize {
        self.count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn count(&self, i: usize) -> usize {
        self.count[i]
    }

    pub fn eccentricity(&self, i: usize) -> f64 {
        self.ecc[i]
    }

    pub fn eccentricity_t(&self, i: usize, t: usize) -> f64 {
        self.ecc_t[i * self.dim + t]
    }

    pub fn distance_eccentricity(&self, i: usize) -> f64 {
        self.dist_ecc[i]
    }

    pub fn distance_eccentricity_t(&self, i: usize, t: usize) -> f64 {
        self.dist_ecc_t[i * self.dim + t]
    }

    /// Orders `a` before `b` when `a` is the more likely border point under
    /// `metric`; ties go to the lower index.
    fn rank_cmp(&self, metric: Metric, a: usize, b: usize) -> Ordering {
        let by_score = match metric {
            Metric::Neighbourhood => self.count[a].cmp(&self.count[b]),
            Metric::Eccentricity => self.ecc[b].total_cmp(&self.ecc[a]),
            Metric::DistanceEccentricity => self.dist_ecc[b].total_cmp(&self.dist_ecc[a]),
        };
        by_score.then(a.cmp(&b))
    }

    /// Sorts `indices` into metric rank order.
    pub fn rank(&self, metric: Metric, indices: &mut [usize]) {
        indices.sort_by(|&a, &b| self.rank_cmp(metric, a, b));
    }

    /// CSV dump with header `index,ncount,E,D`, optionally followed by
    /// `E_0..E_{d-1}` and `D_0..D_{d-1}`.
    pub fn write_csv<W: Write>(&self, mut out: W, per_coordinate: bool) -> Result<()> {
        let mut header = String::from("index,ncount,E,D");
        if per_coordinate {
            for t in 0..self.dim {
                header.push_str(&format!(",E_{t}"));
            }
            for t in 0..self.dim {
                header.push_str(&format!(",D_{t}"));
            }
        }
        writeln!(out, "{header}")?;
        for i in 0..self.len() {
            let mut row = format!("{i},{},{},{}", self.count[i], self.ecc[i], self.dist_ecc[i]);
            if per_coordinate {
                for t in 0..self.dim {
                    row.push_str(&format!(",{}", self.eccentricity_t(i, t)));
                }
                for t in 0..self.dim {
                    row.push_str(&format!(",{}", self.distance_eccentricity_t(i, t)));
                }
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Eccentricity of the larger side over the neighbourhood size; `1` for an
/// empty neighbourhood.
pub fn eccentricity_from_counts(lower: usize, upper: usize) -> f64 {
    let total = lower + upper;
    if total == 0 {
        1.0
    } else {
        lower.max(upper) as f64 / total as f64
    }
}

/// Per-coordinate eccentricities (row-major, `n * d`) and their per-point
/// maxima.
pub fn eccentricity(table: &NeighbourhoodTable) -> (Vec<f64>, Vec<f64>) {
    let dim = table.dim;
    let n = table.len();
    let mut per_t = Vec::with_capacity(n * dim);
    let mut global = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = f64::NEG_INFINITY;
        for t in 0..dim {
            let e = eccentricity_from_counts(table.lower_count(i, t), table.upper_count(i, t));
            per_t.push(e);
            best = best.max(e);
        }
        global.push(best);
    }
    (per_t, global)
}

/// Per-coordinate distance-eccentricities (row-major, `n * d`) and their
/// per-point maxima.
pub fn distance_eccentricity(instance: &Instance, table: &NeighbourhoodTable) -> (Vec<f64>, Vec<f64>) {
    let dim = table.dim;
    let n = table.len();
    let mut per_t = Vec::with_capacity(n * dim);
    let mut global = Vec::with_capacity(n);
    for i in 0..n {
        let xi = instance.point(i);
        let mut best = f64::NEG_INFINITY;
        for (t, &xt) in xi.iter().enumerate().take(dim) {
            let (mut lo_sum, mut lo_n, mut hi_sum, mut hi_n) = (0.0, 0usize, 0.0, 0usize);
            for &j in table.neighbours(i) {
                let yj = instance.point(j)[t];
                if yj <= xt {
                    lo_sum += xt - yj;
                    lo_n += 1;
                } else {
                    hi_sum += yj - xt;
                    hi_n += 1;
                }
            }
            let mean = |sum: f64, k: usize| if k == 0 { 0.0 } else { sum / k as f64 };
            let dt = (mean(lo_sum, lo_n) - mean(hi_sum, hi_n)).abs();
            per_t.push(dt);
            best = best.max(dt);
        }
        global.push(best);
    }
    (per_t, global)
}

/// Threshold-selected starting sample, padded in rank order up to
/// `min(n, 3p)` points. Returned indices are sorted ascending.
pub fn initial_sample(metric: Metric, metrics: &MetricTable, params: &MetricParams, p: usize) -> Vec<usize> {
    let n = metrics.len();
    let mut selected = threshold_sample(metric, metrics, params);
    let target = n.min(3 * p);
    if selected.len() < target {
        let mut chosen = vec![false; n];
        for &i in &selected {
            chosen[i] = true;
        }
        let mut rest: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
        metrics.rank(metric, &mut rest);
        selected.extend(rest.into_iter().take(target - selected.len()));
        selected.sort_unstable();
    }
    selected
}

/// The threshold rule alone, before padding.
pub fn threshold_sample(metric: Metric, metrics: &MetricTable, params: &MetricParams) -> Vec<usize> {
    let n = metrics.len();
    match metric {
        Metric::Neighbourhood => {
            let m0 = metrics.count.iter().copied().min().unwrap_or(0) as f64;
            (0..n).filter(|&i| metrics.count[i] as f64 <= params.alpha * m0).collect()
        }
        Metric::Eccentricity => {
            let e0 = metrics.ecc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..n).filter(|&i| metrics.ecc[i] >= params.beta * e0).collect()
        }
        Metric::DistanceEccentricity => {
            let d0 = metrics.dist_ecc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..n).filter(|&i| metrics.dist_ecc[i] >= params.beta * d0).collect()
        }
    }
}

/// The first `min(k, |uncovered|)` uncovered points in metric rank order.
pub fn increment_sample(metric: Metric, metrics: &MetricTable, uncovered: &[usize], k: usize) -> Result<Vec<usize>> {
    if uncovered.is_empty() {
        return Err(HrcpError::ContractViolation("increment requested with no uncovered points".into()));
    }
    let mut ranked = uncovered.to_vec();
    metrics.rank(metric, &mut ranked);
    ranked.truncate(k);
    Ok(ranked)
}
