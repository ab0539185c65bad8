use super::{SolveOutcome, SolveStatus};
use crate::error::{HrcpError, Result};
use crate::geometry::{span_per_coord, Clustering, Instance};

pub const BRUTE_FORCE_MAX_POINTS: usize = 16;

/// Exhaustive search over all set partitions of the instance into at most
/// `p` nonempty parts.
///
/// Partitions are enumerated as restricted growth strings (`a[0] = 0`,
/// `a[i] <= 1 + max(a[..i])`), so each partition is visited once regardless
/// of cluster labelling. The first partition reaching the minimum span is
/// returned.
pub fn brute_force(instance: &Instance, p: usize) -> Result<SolveOutcome> {
    let n = instance.len();
    if n > BRUTE_FORCE_MAX_POINTS {
        return Err(HrcpError::SizeGuard { n, limit: BRUTE_FORCE_MAX_POINTS });
    }
    if p == 0 {
        return Err(HrcpError::param("p must be at least 1"));
    }
    let mut rgs = vec![0usize; n];
    let mut best_span = f64::INFINITY;
    let mut best_rgs = rgs.clone();
    let mut visited = 0u64;
    enumerate(p, 1, 0, &mut rgs, &mut |labels| {
        visited += 1;
        let span = labelled_span(instance, p, labels);
        if span < best_span {
            best_span = span;
            best_rgs.copy_from_slice(labels);
        }
    });
    let best = Clustering::from_labels(instance, p, &best_rgs)?;
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        lower_bound: best_span,
        upper_bound: best_span,
        best: Some(best),
        nodes: visited,
    })
}

fn enumerate(p: usize, pos: usize, max_label: usize, rgs: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    if pos >= rgs.len() {
        visit(rgs);
        return;
    }
    let top = (max_label + 1).min(p - 1);
    for label in 0..=top {
        rgs[pos] = label;
        enumerate(p, pos + 1, max_label.max(label), rgs, visit);
    }
}

fn labelled_span(instance: &Instance, p: usize, labels: &[usize]) -> f64 {
    (0..p)
        .map(|c| {
            let members = labels.iter().enumerate().filter(|(_, &l)| l == c).map(|(i, _)| instance.point(i));
            span_per_coord(instance.dim(), members).expect("instance points share one dimension").iter().sum::<f64>()
        })
        .sum()
}
