//! Value types and span, box and cover arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{HrcpError, Result};
use crate::COVER_EPS;

/// A finite point set in `R^d` with cached per-coordinate extremes.
///
/// Coordinates are stored row-major; `point(i)` borrows the `d` coordinates
/// of point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    dim: usize,
    coords: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Instance {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim =
            points.first().map(Vec::len).ok_or_else(|| HrcpError::param("instance must contain at least one point"))?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(HrcpError::DimensionMismatch { expected: dim, found: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds an instance from `n * dim` row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(HrcpError::param("dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(HrcpError::param("instance must contain at least one point"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(HrcpError::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(HrcpError::param(format!("non-finite coordinate at point {}", pos / dim)));
        }
        let mut lo = coords[..dim].to_vec();
        let mut hi = lo.clone();
        for row in coords.chunks_exact(dim) {
            for t in 0..dim {
                lo[t] = lo[t].min(row[t]);
                hi[t] = hi[t].max(row[t]);
            }
        }
        Ok(Instance { dim, coords, lo, hi })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Per-coordinate minimum over all points.
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    /// Per-coordinate maximum over all points.
    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Total span of the single box enclosing every point.
    pub fn full_span(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).sum()
    }

    /// The sub-instance formed by `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Instance> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(HrcpError::param(format!("point index {i} out of range")));
            }
            coords.extend_from_slice(self.point(i));
        }
        Instance::from_flat(self.dim, coords)
    }
}

/// Axis-parallel box `[lower[t], upper[t]]` for every coordinate `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterBox {
    #[serde(rename = "l")]
    pub lower: Vec<f64>,
    #[serde(rename = "r")]
    pub upper: Vec<f64>,
}

impl ClusterBox {
    /// Bounding box of the given points, or `None` when there are none.
    pub fn enclosing<'a, I>(points: I) -> Option<ClusterBox>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = ClusterBox { lower: first.to_vec(), upper: first.to_vec() };
        for x in it {
            b.extend(x);
        }
        Some(b)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn extend(&mut self, x: &[f64]) {
        for (t, &v) in x.iter().enumerate() {
            if v < self.lower[t] {
                self.lower[t] = v;
            }
            if v > self.upper[t] {
                self.upper[t] = v;
            }
        }
    }

    pub fn span(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, r)| r - l).sum()
    }
}

/// Per-coordinate span (max minus min) of a set of `dim`-dimensional points.
/// The empty set has span zero in every coordinate.
pub fn span_per_coord<'a, I>(dim: usize, points: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let mut any = false;
    for x in points {
        if x.len() != dim {
            return Err(HrcpError::DimensionMismatch { expected: dim, found: x.len() });
        }
        any = true;
        for t in 0..dim {
            lo[t] = lo[t].min(x[t]);
            hi[t] = hi[t].max(x[t]);
        }
    }
    if !any {
        return Ok(vec![0.0; dim]);
    }
    Ok(lo.iter().zip(&hi).map(|(l, h)| h - l).collect())
}

/// Whether `x` lies in `b`, with the absolute slack [`COVER_EPS`] on every side.
pub fn covers_point(b: &ClusterBox, x: &[f64]) -> Result<bool> {
    if b.dim() != x.len() {
        return Err(HrcpError::DimensionMismatch { expected: b.dim(), found: x.len() });
    }
    Ok(box_contains(b, x))
}

#[inline]
pub(crate) fn box_contains(b: &ClusterBox, x: &[f64]) -> bool {
    x.iter().zip(b.lower.iter().zip(&b.upper)).all(|(&v, (&l, &r))| l - COVER_EPS <= v && v <= r + COVER_EPS)
}

/// An assignment of point indices to `p` clusters together with the boxes
/// they induce.
///
/// `clusters` and `boxes` always have length `p`; empty clusters carry no
/// box. Point indices refer to the instance the clustering was built for, and
/// a clustering may cover only a subset of that instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    p: usize,
    clusters: Vec<Vec<usize>>,
    boxes: Vec<Option<ClusterBox>>,
}

impl Clustering {
    /// Builds a clustering from member lists, computing each box from the
    /// member coordinates. Fewer than `p` lists are padded with empty
    /// clusters.
    pub fn from_members(instance: &Instance, p: usize, mut clusters: Vec<Vec<usize>>) -> Result<Self> {
        if p == 0 {
            return Err(HrcpError::param("p must be at least 1"));
        }
        if clusters.len() > p {
            return Err(HrcpError::param(format!("{} clusters given for p = {p}", clusters.len())));
        }
        clusters.resize(p, Vec::new());
        let n = instance.len();
        let mut boxes = Vec::with_capacity(p);
        for members in &clusters {
            if let Some(&bad) = members.iter().find(|&&i| i >= n) {
                return Err(HrcpError::param(format!("point index {bad} out of range")));
            }
            boxes.push(ClusterBox::enclosing(members.iter().map(|&i| instance.point(i))));
        }
        Ok(Clustering { p, clusters, boxes })
    }

    /// Builds a clustering from a per-point label vector (`labels[i]` is the
    /// cluster of point `i`).
    pub fn from_labels(instance: &Instance, p: usize, labels: &[usize]) -> Result<Self> {
        if labels.len() != instance.len() {
            return Err(HrcpError::param("label count differs from point count"));
        }
        let mut clusters = vec![Vec::new(); p];
        for (i, &c) in labels.iter().enumerate() {
            if c >= p {
                return Err(HrcpError::param(format!("label {c} out of range for p = {p}")));
            }
            clusters[c].push(i);
        }
        Self::from_members(instance, p, clusters)
    }

    /// Assembles a clustering without checking member/box consistency. Use
    /// [`validate_clustering`] to inspect the result.
    pub fn from_raw_parts(p: usize, clusters: Vec<Vec<usize>>, boxes: Vec<Option<ClusterBox>>) -> Self {
        Clustering { p, clusters, boxes }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn boxes(&self) -> &[Option<ClusterBox>] {
        &self.boxes
    }

    pub fn nonempty_count(&self) -> usize {
        self.clusters.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn assigned_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Sum over clusters and coordinates of the box extents.
    pub fn total_span(&self) -> f64 {
        self.boxes.iter().flatten().map(ClusterBox::span).sum()
    }

    /// Rewrites member indices through `map` (e.g. sample position to
    /// original point index). Boxes are unchanged.
    pub fn remap(&self, map: &[usize]) -> Clustering {
        let clusters = self.clusters.iter().map(|c| c.iter().map(|&i| map[i]).collect()).collect();
        Clustering { p: self.p, clusters, boxes: self.boxes.clone() }
    }

    /// Per-point cluster labels over an instance of `n` points; unassigned
    /// points map to `None`.
    pub fn labels(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (c, members) in self.clusters.iter().enumerate() {
            for &i in members {
                if i < n {
                    out[i] = Some(c);
                }
            }
        }
        out
    }

    /// Serializes to the solution JSON format. Only nonempty clusters are
    /// written, so `clusters[k]` and `boxes[k]` always describe the same
    /// cluster.
    pub fn to_json(&self) -> Result<String> {
        let mut file = SolutionFile { p: self.p, span: self.total_span(), clusters: Vec::new(), boxes: Vec::new() };
        for (members, b) in self.clusters.iter().zip(&self.boxes) {
            if let (false, Some(b)) = (members.is_empty(), b) {
                file.clusters.push(members.clone());
                file.boxes.push(b.clone());
            }
        }
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses the solution JSON format. Boxes are taken as written.
    pub fn from_json(text: &str) -> Result<Clustering> {
        let file: SolutionFile = serde_json::from_str(text)?;
        if file.clusters.len() != file.boxes.len() {
            return Err(HrcpError::param("solution has different numbers of clusters and boxes"));
        }
        if file.clusters.len() > file.p {
            return Err(HrcpError::param("solution has more clusters than p"));
        }
        let mut clusters = file.clusters;
        let mut boxes: Vec<Option<ClusterBox>> = file.boxes.into_iter().map(Some).collect();
        clusters.resize(file.p, Vec::new());
        boxes.resize(file.p, None);
        Ok(Clustering { p: file.p, clusters, boxes })
    }
}

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    p: usize,
    span: f64,
    clusters: Vec<Vec<usize>>,
    boxes: Vec<ClusterBox>,
}

/// Result of checking whether a clustering's boxes cover an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub covered: bool,
    pub uncovered: Vec<usize>,
}

/// Index of the lowest nonempty cluster whose box contains `x`.
pub fn covering_cluster(clustering: &Clustering, x: &[f64]) -> Option<usize> {
    clustering.boxes.iter().position(|b| b.as_ref().is_some_and(|b| box_contains(b, x)))
}

/// Checks every point of `instance` against the clustering's boxes. Empty
/// clusters cover nothing.
pub fn clustering_covers(clustering: &Clustering, instance: &Instance) -> CoverReport {
    let uncovered: Vec<usize> =
        (0..instance.len()).filter(|&i| covering_cluster(clustering, instance.point(i)).is_none()).collect();
    CoverReport { covered: uncovered.is_empty(), uncovered }
}

/// Assigns every unassigned point of `instance` to the lowest-indexed cluster
/// whose box covers it. Boxes are kept as they are.
pub fn absorb_covered(clustering: &Clustering, instance: &Instance) -> Result<Clustering> {
    let n = instance.len();
    let labels = clustering.labels(n);
    let mut out = clustering.clone();
    for (i, label) in labels.iter().enumerate() {
        if label.is_some() {
            continue;
        }
        let c = covering_cluster(clustering, instance.point(i))
            .ok_or_else(|| HrcpError::ContractViolation(format!("point {i} is not covered by the clustering")))?;
        out.clusters[c].push(i);
    }
    for members in &mut out.clusters {
        members.sort_unstable();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    IndexOutOfRange { cluster: usize, index: usize },
    AssignedTwice { index: usize },
    Unassigned { index: usize },
    TooManyClusters { found: usize, p: usize },
    BoxMismatch { cluster: usize },
    MissingBox { cluster: usize },
    EmptyClusterWithBox { cluster: usize },
}

/// Checks that `clustering` is a partition of `instance` into at most `p`
/// clusters whose boxes are exactly the members' bounding boxes. An empty
/// result means the clustering is valid.
pub fn validate_clustering(clustering: &Clustering, instance: &Instance, p: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = instance.len();
    if clustering.clusters.len() > p || clustering.nonempty_count() > p {
        out.push(Violation::TooManyClusters { found: clustering.nonempty_count().max(clustering.clusters.len()), p });
    }
    let mut seen = vec![false; n];
    for (c, members) in clustering.clusters.iter().enumerate() {
        for &i in members {
            if i >= n {
                out.push(Violation::IndexOutOfRange { cluster: c, index: i });
            } else if seen[i] {
                out.push(Violation::AssignedTwice { index: i });
            } else {
                seen[i] = true;
            }
        }
        let expected = ClusterBox::enclosing(members.iter().filter(|&&i| i < n).map(|&i| instance.point(i)));
        match (clustering.boxes.get(c).and_then(Option::as_ref), expected) {
            (None, None) => {}
            (Some(_), None) => out.push(Violation::EmptyClusterWithBox { cluster: c }),
            (None, Some(_)) => out.push(Violation::MissingBox { cluster: c }),
            (Some(actual), Some(expected)) => {
                if *actual != expected {
                    out.push(Violation::BoxMismatch { cluster: c });
                }
            }
        }
    }
    out.extend(seen.iter().enumerate().filter(|(_, &s)| !s).map(|(index, _)| Violation::Unassigned { index }));
    out
}
