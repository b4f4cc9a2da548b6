use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rnlab::distances::{absolute_distance, distance_to_property, edit_distance_uniform, weighted_edit_distance};
use rnlab::error::Error;
use rnlab::generators::{cycle, grid, path, random_lipschitz_weights};
use rnlab::graph::WeightedGraph;
use rnlab::partitions::{
    build_uniform_cover, find_weighted_partition, verify_uniform_cover, verify_weighted_partition, CoverFamily,
};
use rnlab::properties::PropertySpec;

mod common;
use common::random_graph;

fn properties() -> Vec<PropertySpec> {
    vec![
        PropertySpec::Forest,
        PropertySpec::Bipartite,
        PropertySpec::triangle_free(),
        PropertySpec::KColorable { k: 2 },
    ]
}

/// Least number of edges whose deletion puts `g` in `p`, over all subsets.
fn brute_force_deletions(g: &WeightedGraph, p: &PropertySpec) -> usize {
    let edges = g.edges();
    let m = edges.len();
    (0u32..1 << m)
        .filter(|mask| {
            let kept: Vec<_> = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| edges[i]).collect();
            p.holds(g.vertex_count(), &kept).unwrap()
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

/// Same topology with a fresh random distribution of ratio bound `k`.
fn reweighted(g: &WeightedGraph, k: f64, seed: u64) -> WeightedGraph {
    random_lipschitz_weights(g, k, seed).unwrap()
}

#[test]
fn uniform_distance_is_scaled_edit_distance() {
    for seed in 0..60u64 {
        let n = 3 + (seed % 5) as usize;
        let g = random_graph(n, 3, 1.0 + 1e-9, seed);
        let g = g.with_log_weights(vec![0.0; n]).unwrap();
        for p in properties() {
            let expected = brute_force_deletions(&g, &p) as f64 / (g.degree_bound() * n) as f64;
            let got = distance_to_property(&g, &p).unwrap().distance;
            assert!((got - 2.0 * g.degree_bound() as f64 * expected).abs() < 1e-12, "{p} seed {seed}");
        }
    }
}

#[test]
fn distance_is_below_absolute_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..200u64 {
        let n = rng.random_range(3..8);
        let k = rng.random_range(1.2..4.0);
        let g = random_graph(n, 3, k, trial);
        if g.edge_count() > 12 {
            continue;
        }
        let p = &properties()[(trial % 3) as usize];
        let abs = absolute_distance(&g, p, g.ratio_bound()).unwrap();
        let d = distance_to_property(&g, p).unwrap().distance;
        assert!(d <= abs.distance + 1e-9, "trial {trial}: {d} > {}", abs.distance);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn weighted_edit_distance_is_a_metric(n in 3usize..20, seed in any::<u64>()) {
        let base = random_graph(n, 3, 2.0, seed);
        let w = base.log_weights().to_vec();
        let variant = |s: u64| {
            let g = random_graph(n, 3, 2.0, s);
            g.with_bounds(3, 1e12).unwrap().with_log_weights(w.clone()).unwrap()
        };
        let (a, b, c) = (variant(seed), variant(seed ^ 1), variant(seed ^ 2));
        let ab = weighted_edit_distance(&a, &b).unwrap();
        prop_assert!((ab - weighted_edit_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(weighted_edit_distance(&a, &a).unwrap() == 0.0);
        let via = ab + weighted_edit_distance(&b, &c).unwrap();
        prop_assert!(weighted_edit_distance(&a, &c).unwrap() <= via + 1e-12);
    }

    #[test]
    fn deleting_an_edge_never_increases_distance(n in 3usize..10, seed in any::<u64>(), pick in any::<usize>()) {
        let g = random_graph(n, 3, 3.0, seed);
        let e = g.edges()[pick % g.edge_count()];
        let h = g.without_edges(&[e]).unwrap();
        for p in properties() {
            let before = distance_to_property(&g, &p).unwrap().distance;
            let after = distance_to_property(&h, &p).unwrap().distance;
            prop_assert!(after <= before + 1e-12);
        }
    }

    #[test]
    fn uniform_edit_distance_is_symmetric_under_relabeling(n in 2usize..8, seed in any::<u64>()) {
        let g = random_graph(n, 3, 1.5, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left(seed as usize % n);
        let h = g.permuted(&perm).unwrap();
        prop_assert_eq!(edit_distance_uniform(&g, &h).unwrap(), 0.0);
    }
}

/// Random graphs with extra edges are often expanders, which have no small
/// partition; the constructor must then report infeasibility, never a bad
/// certificate.
#[test]
fn constructed_partitions_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..1000u64 {
        let n = rng.random_range(1..300);
        let k = rng.random_range(1.0..6.0);
        let epsilon = rng.random_range(0.05..0.6);
        let g = random_graph(n, 3, k, trial);
        match find_weighted_partition(&g, epsilon, None) {
            Ok(cert) => assert!(verify_weighted_partition(&g, &cert), "trial {trial}"),
            Err(e) => assert!(matches!(e, Error::Infeasible(_)), "trial {trial}: {e}"),
        }
        let tree = g.without_edges(&extra_edges(&g)).unwrap();
        if let Ok(cert) = find_weighted_partition(&tree, epsilon, None) {
            assert!(verify_weighted_partition(&tree, &cert), "tree trial {trial}");
        }
    }
}

/// Non-tree edges of a BFS spanning forest.
fn extra_edges(g: &WeightedGraph) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    let mut parent = vec![usize::MAX; n];
    for s in 0..n {
        if parent[s] != usize::MAX {
            continue;
        }
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    queue.push_back(w);
                }
            }
        }
    }
    g.edges().into_iter().filter(|&(u, v)| parent[u] != v && parent[v] != u).collect()
}

fn cover_cases(epsilon: f64) -> Vec<(WeightedGraph, CoverFamily)> {
    let mut cases = Vec::new();
    for n in [5, 30, 101, 500] {
        cases.push((path(n).unwrap(), CoverFamily::Path));
    }
    // The shift only closes up on cycles whose length the spacing divides.
    for n in [5, 40, 120, 400] {
        cases.push((cycle(n).unwrap(), CoverFamily::Cycle));
    }
    // Removing whole rows and columns stays below `εn` only on grids whose
    // sides are multiples of the spacing.
    let m = (2.0 / epsilon).floor() as usize + 1;
    for (rows, cols) in [(3, 4), (m, 2 * m), (3 * m, 3 * m)] {
        cases.push((grid(rows, cols).unwrap(), CoverFamily::Grid { rows, cols }));
    }
    cases
}

#[test]
fn uniform_covers_verify() {
    for epsilon in [0.1, 0.2, 0.25] {
        for (g, family) in cover_cases(epsilon) {
            let cert = build_uniform_cover(&g, epsilon, family).unwrap();
            assert!(verify_uniform_cover(&g, &cert), "{family:?} n={} eps={epsilon}", g.vertex_count());
        }
    }
}

/// Each vertex sits in fewer than `εL` covers, so for every distribution some
/// cover has mass below `ε`.
#[test]
fn uniform_covers_have_a_light_member_for_every_distribution() {
    for epsilon in [0.1, 0.2, 0.25] {
        for (g, family) in cover_cases(epsilon) {
            let cert = build_uniform_cover(&g, epsilon, family).unwrap();
            for seed in 0..20 {
                let q = reweighted(&g, 8.0, seed);
                let lightest = cert.covers.iter().map(|y| q.mass(y.iter().copied())).fold(f64::INFINITY, f64::min);
                assert!(lightest < epsilon, "{family:?} eps={epsilon} seed={seed}");
            }
        }
    }
}
