use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rnlab::generators::random_lipschitz_weights;
use rnlab::graph::{build_graph, WeightedGraph};

/// Random connected graph with degree at most `d`: a random tree plus extra
/// edges, then Lipschitz weights with ratio bound `k`.
pub fn random_graph(n: usize, d: usize, k: f64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    for v in 1..n {
        let options: Vec<usize> = (0..v).filter(|&u| deg[u] < d).collect();
        let u = options[rng.random_range(0..options.len())];
        edges.insert((u, v));
        deg[u] += 1;
        deg[v] += 1;
    }
    for _ in 0..n {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v && deg[u] < d && deg[v] < d && edges.insert((u.min(v), u.max(v))) {
            deg[u] += 1;
            deg[v] += 1;
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let g = build_graph(&edges, vec![0.0; n], d, 1.0 + 1e-9).unwrap();
    random_lipschitz_weights(&g, k, seed).unwrap()
}
