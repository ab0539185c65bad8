use hrcp_core::geometry::{absorb_covered, clustering_covers, covers_point, validate_clustering, ClusterBox};
use hrcp_core::incremental::{run, IncrementalConfig, IncrementalStatus};
use hrcp_core::instance::{instance_to_string, read_instance};
use hrcp_core::metrics::{build_neighbourhoods, increment_sample, initial_sample, Metric, MetricParams, MetricTable};
use hrcp_core::solver::{brute_force, solve, solve_with, SolveLimits, SolverOptions};
use hrcp_core::{Clustering, Instance};
use proptest::prelude::*;

/// Points on a coarse grid so that spans are exact in binary and ties occur.
fn grid_points(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_d).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec((-16i32..16).prop_map(|v| v as f64 * 0.25), d), 1..=max_n)
    })
}

fn uniform_points(max_n: usize, max_d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_d).prop_flat_map(move |d| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..=max_n))
}

fn no_sink(_: &Clustering) {}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_brute_force(points in grid_points(10, 3), p in 1usize..=3) {
        let x = Instance::new(points).unwrap();
        let oracle = brute_force(&x, p).unwrap().upper_bound;
        let out = solve(&x, p, &SolveLimits::default(), &mut no_sink).unwrap();
        prop_assert!(out.is_optimal());
        prop_assert!((out.upper_bound - oracle).abs() <= 1e-9);
        prop_assert!(validate_clustering(out.best.as_ref().unwrap(), &x, p).is_empty());
    }

    #[test]
    fn solver_without_dominance_matches_brute_force(points in uniform_points(8, 2), p in 1usize..=3) {
        let x = Instance::new(points).unwrap();
        let oracle = brute_force(&x, p).unwrap().upper_bound;
        let opts = SolverOptions { covered_dominance: false, ..Default::default() };
        let out = solve_with(&x, p, &opts, &mut no_sink).unwrap();
        prop_assert!((out.upper_bound - oracle).abs() <= 1e-9);
    }

    #[test]
    fn optimum_ignores_point_order(points in uniform_points(12, 3), p in 1usize..=3, rot in 0usize..12) {
        let x = Instance::new(points.clone()).unwrap();
        let mut shuffled = points;
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let y = Instance::new(shuffled).unwrap();
        let a = solve(&x, p, &SolveLimits::default(), &mut no_sink).unwrap().upper_bound;
        let b = solve(&y, p, &SolveLimits::default(), &mut no_sink).unwrap().upper_bound;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn truncated_lower_bound_is_valid(points in uniform_points(11, 2), p in 2usize..=3, nodes in 1u64..200) {
        let x = Instance::new(points).unwrap();
        let oracle = brute_force(&x, p).unwrap().upper_bound;
        let mut stream = Vec::new();
        let out = solve(&x, p, &SolveLimits::default().with_nodes(nodes), &mut |c: &Clustering| stream.push(c.clone())).unwrap();
        prop_assert!(out.lower_bound <= oracle + 1e-12);
        prop_assert!(out.lower_bound <= out.upper_bound + 1e-9);
        for w in stream.windows(2) {
            prop_assert!(w[1].total_span() < w[0].total_span());
        }
        for c in &stream {
            prop_assert!(validate_clustering(c, &x, p).is_empty());
        }
    }

    #[test]
    fn incremental_is_exact(points in uniform_points(12, 2), p in 1usize..=3, metric in 0usize..3, k in 1usize..4) {
        let x = Instance::new(points).unwrap();
        let oracle = brute_force(&x, p).unwrap().upper_bound;
        let mut config = IncrementalConfig::new(p, Metric::ALL[metric]);
        config.metric_params.k = Some(k);
        let res = run(&x, &config).unwrap();
        prop_assert_eq!(res.status, IncrementalStatus::Optimal);
        prop_assert!((res.upper_bound - oracle).abs() <= 1e-9);
        let c = res.clustering.unwrap();
        prop_assert!(validate_clustering(&c, &x, p).is_empty());
        for w in res.trace.windows(2) {
            prop_assert!(w[1].global_lb >= w[0].global_lb);
            prop_assert!(w[1].global_ub <= w[0].global_ub);
            prop_assert!(w[1].sample_size > w[0].sample_size);
        }
        prop_assert!(res.iterations <= x.len() + 1);
    }

    #[test]
    fn span_monotone_under_insertion(points in uniform_points(10, 3), extra in prop::collection::vec(-2.0f64..2.0, 3)) {
        let x = Instance::new(points).unwrap();
        let b = ClusterBox::enclosing(x.points()).unwrap();
        let z: Vec<f64> = extra.iter().take(x.dim()).copied().collect();
        let mut grown = b.clone();
        grown.extend(&z);
        prop_assert!(grown.span() >= b.span());
        for pt in x.points() {
            prop_assert!(covers_point(&b, pt).unwrap());
        }
    }

    #[test]
    fn span_translation_and_scaling(points in grid_points(10, 3), shift in -8i32..8, exp in -3i32..4) {
        let x = Instance::new(points.clone()).unwrap();
        let n = x.len();
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let base = Clustering::from_labels(&x, 3, &labels).unwrap().total_span();

        let t = shift as f64 * 0.5;
        let moved = Instance::new(points.iter().map(|p| p.iter().map(|v| v + t).collect()).collect()).unwrap();
        prop_assert_eq!(Clustering::from_labels(&moved, 3, &labels).unwrap().total_span(), base);

        let lambda = 2f64.powi(exp);
        let scaled = Instance::new(points.iter().map(|p| p.iter().map(|v| v * lambda).collect()).collect()).unwrap();
        prop_assert_eq!(Clustering::from_labels(&scaled, 3, &labels).unwrap().total_span(), base * lambda);

        // Relabelling clusters leaves the span unchanged.
        let relabelled: Vec<usize> = labels.iter().map(|&l| 2 - l).collect();
        prop_assert_eq!(Clustering::from_labels(&x, 3, &relabelled).unwrap().total_span(), base);
    }

    #[test]
    fn absorb_keeps_boxes(points in uniform_points(30, 2), sample_len in 1usize..30, p in 1usize..4) {
        let x = Instance::new(points).unwrap();
        let m = sample_len.min(x.len());
        let sample: Vec<usize> = (0..m).collect();
        let sub = x.subset(&sample).unwrap();
        let c = solve(&sub, p, &SolveLimits::default(), &mut no_sink).unwrap().best.unwrap().remap(&sample);
        if clustering_covers(&c, &x).covered {
            let full = absorb_covered(&c, &x).unwrap();
            prop_assert_eq!(full.boxes(), c.boxes());
            prop_assert_eq!(full.total_span(), c.total_span());
            prop_assert_eq!(full.assigned_count(), x.len());
        } else {
            prop_assert!(absorb_covered(&c, &x).is_err());
        }
    }

    #[test]
    fn instance_file_round_trip(points in uniform_points(20, 4)) {
        let x = Instance::new(points).unwrap();
        let back = read_instance(instance_to_string(&x).as_bytes()).unwrap();
        for (a, b) in x.points().flatten().zip(back.points().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn neighbourhood_table_invariants(points in uniform_points(60, 3), delta in 0.05f64..1.5) {
        let x = Instance::new(points).unwrap();
        let t = build_neighbourhoods(&x, delta).unwrap();
        let m = MetricTable::from_neighbourhoods(&x, &t);
        for i in 0..x.len() {
            prop_assert!(!t.neighbours(i).contains(&i));
            for &j in t.neighbours(i) {
                prop_assert!(t.neighbours(j).contains(&i));
            }
            for dim in 0..x.dim() {
                prop_assert_eq!(t.lower_count(i, dim) + t.upper_count(i, dim), t.count(i));
                let e = m.eccentricity_t(i, dim);
                if t.count(i) > 0 {
                    prop_assert!((0.5..=1.0).contains(&e));
                } else {
                    prop_assert_eq!(e, 1.0);
                }
                prop_assert!(m.distance_eccentricity_t(i, dim) >= 0.0);
            }
        }
    }

    #[test]
    fn metric_scale_equivariance(points in uniform_points(40, 3), delta in 0.1f64..1.0, exp in -2i32..3) {
        let lambda = 2f64.powi(exp);
        let x = Instance::new(points.clone()).unwrap();
        let y = Instance::new(points.iter().map(|p| p.iter().map(|v| v * lambda).collect()).collect()).unwrap();
        let tx = build_neighbourhoods(&x, delta).unwrap();
        let ty = build_neighbourhoods(&y, delta * lambda).unwrap();
        let (mx, my) = (MetricTable::from_neighbourhoods(&x, &tx), MetricTable::from_neighbourhoods(&y, &ty));
        for i in 0..x.len() {
            prop_assert_eq!(tx.neighbours(i), ty.neighbours(i));
            prop_assert_eq!(mx.eccentricity(i), my.eccentricity(i));
            prop_assert_eq!(mx.distance_eccentricity(i) * lambda, my.distance_eccentricity(i));
        }
        let params = MetricParams { delta: Some(delta), ..Default::default() };
        let all: Vec<usize> = (0..x.len()).collect();
        for metric in Metric::ALL {
            prop_assert_eq!(initial_sample(metric, &mx, &params, 3), initial_sample(metric, &my, &params, 3));
            prop_assert_eq!(increment_sample(metric, &mx, &all, 7).unwrap(), increment_sample(metric, &my, &all, 7).unwrap());
        }
    }
}

#[test]
fn metric_table_is_reproducible() {
    let x = Instance::new((0..80).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect()).unwrap();
    let params = MetricParams::default();
    assert_eq!(MetricTable::build(&x, &params).unwrap(), MetricTable::build(&x, &params).unwrap());
}
