use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rnlab::generators::{
    binary_tree, cycle, grid, orbit_tree, path, perturbed_union, random_lipschitz_weights, random_regular,
    WeightProfile,
};
use rnlab::graph::build_graph;
use rnlab::quotient::TreeQuotient;

mod common;
use common::random_graph;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ratios_are_bounded_and_reciprocal(n in 2usize..50, d in 2usize..5, k in 1.1f64..8.0, seed in any::<u64>()) {
        let g = random_graph(n, d, k, seed);
        let total: f64 = g.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (u, v) in g.edges() {
            let r = g.ratio(u, v).unwrap();
            prop_assert!(r <= g.ratio_bound() * (1.0 + 1e-9) && r >= 1.0 / g.ratio_bound() / (1.0 + 1e-9));
            prop_assert_eq!(g.log_ratio(u, v).unwrap(), -g.log_ratio(v, u).unwrap());
            prop_assert!((g.exact_log_ratio(u, v).unwrap() + g.exact_log_ratio(v, u).unwrap()).is_zero());
        }
    }

    #[test]
    fn bijection_identity(n in 2usize..50, seed in any::<u64>()) {
        let g = random_graph(n, 3, 4.0, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut used = vec![false; n];
        let (mut lhs, mut image) = (0.0, Vec::new());
        for v in 0..n {
            if used[v] || rng.random_bool(0.4) {
                continue;
            }
            if let Some(&w) = g.neighbors(v).iter().find(|&&w| !used[w]) {
                used[v] = true;
                used[w] = true;
                lhs += g.ratio(v, w).unwrap() * g.probability(v);
                image.push(w);
            }
        }
        prop_assert!((lhs - g.mass(image)).abs() <= 1e-12);
    }

    #[test]
    fn cycle_products_are_one(n in 3usize..40, k in 1.1f64..5.0, seed in any::<u64>()) {
        let g = random_lipschitz_weights(&cycle(n).unwrap(), k, seed).unwrap();
        let sum = (0..n).fold(BigRational::zero(), |acc, i| acc + g.exact_log_ratio(i, (i + 1) % n).unwrap());
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn random_regular_is_reproducible(seed in any::<u64>()) {
        let a = random_regular(20, 3, seed).unwrap();
        let b = random_regular(20, 3, seed).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}

#[test]
fn generators_pass_validation() {
    let graphs = vec![
        binary_tree(8, 0.7).unwrap(),
        path(10).unwrap(),
        cycle(9).unwrap(),
        grid(4, 7).unwrap(),
        random_regular(30, 3, 2).unwrap(),
        perturbed_union(8, 3, WeightProfile::Uniform).unwrap(),
        perturbed_union(8, 3, WeightProfile::Adversarial).unwrap(),
        orbit_tree(5).unwrap(),
    ];
    for g in graphs {
        let rebuilt = build_graph(&g.edges(), g.log_weights().to_vec(), g.degree_bound(), g.ratio_bound());
        assert!(rebuilt.is_ok());
    }
}

/// Layer masses against `(2 e^{-β})^i` normalized, materialized up to depth 18
/// and on the quotient up to 25.
#[test]
fn binary_tree_layer_masses_match_closed_form() {
    for beta in [0.0, 0.5, std::f64::consts::LN_2, 1.3] {
        for depth in 1..=25usize {
            let closed: Vec<f64> = {
                let raw: Vec<f64> = (0..depth).map(|i| (i as f64 * (2f64.ln() - beta)).exp()).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            };
            let q = TreeQuotient::binary_tree(depth, beta).unwrap();
            for (a, b) in q.class_masses().iter().zip(&closed) {
                assert!((a - b).abs() < 1e-12);
            }
            if depth <= 18 {
                let g = binary_tree(depth, beta).unwrap();
                let mut layers = vec![0.0; depth];
                for v in 0..g.vertex_count() {
                    layers[rnlab::generators::heap_layer(v)] += g.probability(v);
                }
                for (a, b) in layers.iter().zip(&closed) {
                    // Summing 2^18 probabilities accumulates rounding.
                    assert!((a - b).abs() < 1e-9, "depth {depth}, beta {beta}");
                }
            }
        }
    }
}
