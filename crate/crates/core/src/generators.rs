//! Example graph families with reproducible seeds.

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, minimal_ratio_bound, WeightedGraph};

/// Minimum `d - λ₂` accepted for the expander part of a perturbed union.
pub const EXPANDER_MIN_GAP: f64 = 0.1;

const MAX_RESAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    Uniform,
    /// Half of the total mass spread uniformly over the expander part.
    Adversarial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LayerMode {
    /// `w(x) = exp(-beta * dist(root, x))`.
    ExpBeta { beta: f64 },
    /// `w(x) = 1 / |S_k|` where `S_k` is the sphere containing `x`.
    InverseSphere,
}

/// A family with its parameters and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum GeneratorSpec {
    BinaryTree { depth: usize, beta: f64 },
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
    PerturbedUnion { n: usize, seed: u64, profile: WeightProfile },
    OrbitTree { depth: usize },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<WeightedGraph> {
        match *self {
            GeneratorSpec::BinaryTree { depth, beta } => binary_tree(depth, beta),
            GeneratorSpec::Path { n } => path(n),
            GeneratorSpec::Cycle { n } => cycle(n),
            GeneratorSpec::Grid { rows, cols } => grid(rows, cols),
            GeneratorSpec::RandomRegular { n, d, seed } => random_regular(n, d, seed),
            GeneratorSpec::PerturbedUnion { n, seed, profile } => {
                perturbed_union(n, seed, profile)
            }
            GeneratorSpec::OrbitTree { depth } => orbit_tree(depth),
        }
    }
}

fn with_minimal_bound(
    edges: &[(usize, usize)],
    log_weights: Vec<f64>,
    degree_bound: usize,
) -> Result<WeightedGraph> {
    let k = minimal_ratio_bound(edges, &log_weights);
    build_graph(edges, log_weights, degree_bound, k)
}

/// Layer of heap-indexed vertex `v` (root 0, children `2v+1`, `2v+2`).
pub fn heap_layer(v: usize) -> usize {
    (usize::BITS - 1 - (v + 1).leading_zeros()) as usize
}

/// The binary tree `T_n` with layers `L_0..L_{n-1}` and weights `exp(-beta * k)`
/// on layer `k`. Vertices are heap-indexed.
pub fn binary_tree(depth: usize, beta: f64) -> Result<WeightedGraph> {
    if depth == 0 || !(beta >= 0.0) || depth >= usize::BITS as usize - 1 {
        return Err(Error::InvalidParameter(format!(
            "binary tree needs depth >= 1 and beta >= 0, got ({depth}, {beta})"
        )));
    }
    let n = (1usize << depth) - 1;
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
    let lw = (0..n).map(|v| -beta * heap_layer(v) as f64).collect();
    with_minimal_bound(&edges, lw, 3)
}

pub fn path(n: usize) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::InvalidSize("path needs at least one vertex".into()));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    WeightedGraph::uniform(n, &edges, 2)
}

pub fn cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    WeightedGraph::uniform(n, &edges, 2)
}

/// `rows × cols` grid; vertex `(i, j)` has id `i * cols + j`.
pub fn grid(rows: usize, cols: usize) -> Result<WeightedGraph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSize("grid needs positive dimensions".into()));
    }
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                edges.push((v, v + 1));
            }
            if i + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    WeightedGraph::uniform(rows * cols, &edges, 4)
}

/// Random simple `d`-regular graph from the configuration model, rejecting
/// pairings with loops or multi-edges.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<WeightedGraph> {
    let edges = random_regular_edges(n, d, &mut ChaCha8Rng::seed_from_u64(seed))?;
    WeightedGraph::uniform(n, &edges, d.max(1))
}

fn random_regular_edges(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    if n == 0 || (n * d) % 2 != 0 || d >= n {
        return Err(Error::InvalidSize(format!(
            "no simple {d}-regular graph on {n} vertices"
        )));
    }
    let mut points: Vec<usize> = (0..n * d).map(|i| i / d).collect();
    'attempt: for _ in 0..MAX_RESAMPLES {
        points.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return Ok(edges);
    }
    Err(Error::InvalidSize(format!(
        "configuration model failed for n = {n}, d = {d}"
    )))
}

/// `d - λ₂` of the adjacency matrix of a `d`-regular graph.
pub fn spectral_gap(n: usize, edges: &[(usize, usize)], d: usize) -> f64 {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in edges {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    d as f64 - eig.get(1).copied().unwrap_or(d as f64)
}

/// Random 3-regular graph with spectral gap above [`EXPANDER_MIN_GAP`].
pub fn random_expander(n: usize, seed: u64) -> Result<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let edges = random_regular_edges(n, 3, &mut rng)?;
        if spectral_gap(n, &edges, 3) > EXPANDER_MIN_GAP {
            return WeightedGraph::uniform(n, &edges, 3);
        }
    }
    Err(Error::InvalidSize(format!("no expander found on {n} vertices")))
}

/// `J_n`: a path on `n²` vertices, a random 3-regular expander on `n`
/// vertices, and one bridge from the last path vertex to the first expander
/// vertex. Path vertices are `0..n²`, expander vertices `n²..n²+n`.
pub fn perturbed_union(n: usize, seed: u64, profile: WeightProfile) -> Result<WeightedGraph> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::InvalidSize(format!(
            "perturbed union needs an even n >= 4, got {n}"
        )));
    }
    let m = n * n;
    let expander = random_expander(n, seed)?;
    let mut edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
    edges.extend(expander.edges().into_iter().map(|(u, v)| (u + m, v + m)));
    edges.push((m - 1, m));
    let lw = match profile {
        WeightProfile::Uniform => vec![0.0; m + n],
        WeightProfile::Adversarial => {
            // n² path vertices of weight 1 and n expander vertices of weight n.
            let heavy = (n as f64).ln();
            (0..m + n).map(|v| if v < m { 0.0 } else { heavy }).collect()
        }
    };
    with_minimal_bound(&edges, lw, 4)
}

/// Path part `G_n` of [`perturbed_union`] with the same bounds as `j`.
pub fn perturbed_union_path_part(n: usize, j: &WeightedGraph) -> Result<WeightedGraph> {
    let m = n * n;
    let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
    build_graph(&edges, vec![0.0; m], j.degree_bound(), j.ratio_bound())
}

/// Truncation of the 3-regular tree in which every vertex has one neighbour of
/// twice its weight and two of half its weight. Vertex 0 is the root.
pub fn orbit_tree(depth: usize) -> Result<WeightedGraph> {
    if depth == 0 {
        return Err(Error::InvalidParameter("orbit tree needs depth >= 1".into()));
    }
    // (height, distance from root, whether the parent is the heavy neighbour)
    let mut level: Vec<i64> = vec![0];
    let mut dist = vec![0usize];
    let mut parent_heavy: Vec<Option<bool>> = vec![None];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if dist[v] == depth {
            continue;
        }
        // Heavy neighbours of v not yet present, then light ones.
        let (heavy, light) = match parent_heavy[v] {
            None => (1, 2),
            Some(true) => (0, 2),
            Some(false) => (1, 1),
        };
        for (count, delta, heavy_parent_for_child) in [(heavy, 1i64, false), (light, -1, true)] {
            for _ in 0..count {
                let w = level.len();
                level.push(level[v] + delta);
                dist.push(dist[v] + 1);
                parent_heavy.push(Some(heavy_parent_for_child));
                edges.push((v, w));
                queue.push_back(w);
            }
        }
    }
    let lw = level
        .iter()
        .map(|&h| std::f64::consts::LN_2 * h as f64)
        .collect();
    with_minimal_bound(&edges, lw, 3)
}

/// Replaces the weights of a connected graph by layered weights around `root`.
pub fn layered_weights(g: &WeightedGraph, root: usize, mode: LayerMode) -> Result<WeightedGraph> {
    g.check_vertex(root)?;
    let dist = g.distances_from(root);
    if dist.contains(&usize::MAX) {
        return Err(Error::Disconnected);
    }
    let lw = match mode {
        LayerMode::ExpBeta { beta } => {
            if !(beta >= 0.0) {
                return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
            }
            dist.iter().map(|&k| -beta * k as f64).collect()
        }
        LayerMode::InverseSphere => {
            let radius = dist.iter().copied().max().unwrap_or(0);
            let mut sphere = vec![0usize; radius + 1];
            for &k in &dist {
                sphere[k] += 1;
            }
            dist.iter().map(|&k| -(sphere[k] as f64).ln()).collect()
        }
    };
    g.with_log_weights(lw)
}

/// Random weights with ratio at most `k` across every edge: a convex mix of
/// three triangle waves of the distance to random sources, each of slope one,
/// scaled by `ln k`. Periods and phases are random, so mass piles up in
/// irregular places.
pub fn random_lipschitz_weights(g: &WeightedGraph, k: f64, seed: u64) -> Result<WeightedGraph> {
    if !(k >= 1.0) {
        return Err(Error::InvalidParameter(format!("ratio bound must be at least 1, got {k}")));
    }
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lw = vec![0.0; n];
    let mixes: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = mixes.iter().sum::<f64>().max(1e-12);
    for mix in mixes {
        let source = rng.random_range(0..n);
        let period = rng.random_range(2..=40usize) as f64;
        let phase = rng.random_range(0.0..period);
        let dist = g.distances_from(source);
        for v in 0..n {
            let x = if dist[v] == usize::MAX { 0.0 } else { dist[v] as f64 };
            let m = (x + phase) % period;
            let wave = m.min(period - m);
            lw[v] += mix / total * wave * k.ln();
        }
    }
    let with = g.with_log_weights(lw)?;
    with.with_bounds(g.degree_bound(), k.max(with.ratio_bound()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn layer_masses(g: &WeightedGraph, depth: usize) -> Vec<f64> {
        let mut m = vec![0.0; depth];
        for v in 0..g.vertex_count() {
            m[heap_layer(v)] += g.probability(v);
        }
        m
    }

    #[test]
    fn beta_zero_tree_is_uniform() {
        let g = binary_tree(3, 0.0).unwrap();
        assert_eq!(g.vertex_count(), 7);
        for v in 0..7 {
            assert_eq!(g.probability(v), 1.0 / 7.0);
        }
    }

    #[test]
    fn critical_tree_has_equal_layer_masses() {
        for depth in [3, 8, 12] {
            for m in layer_masses(&binary_tree(depth, LN_2).unwrap(), depth) {
                assert!((m - 1.0 / depth as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn supercritical_tree_concentrates_near_the_root() {
        let q = crate::quotient::TreeQuotient::binary_tree(20, 2.0 * LN_2).unwrap();
        let top: f64 = q.class_masses()[..6].iter().sum();
        // Layer i has mass ∝ 2^-i, so the top six layers hold 1 - 2^-6 of
        // (1 - 2^-20): 0.98437...
        let expected = (1.0 - 0.5f64.powi(6)) / (1.0 - 0.5f64.powi(20));
        assert!((top - expected).abs() < 1e-12);
        assert!(top > 0.9);
    }

    #[test]
    fn tree_ratios() {
        let g = binary_tree(4, LN_2).unwrap();
        assert!((g.ratio(1, 3).unwrap() - 0.5).abs() < 1e-15);
        assert!((g.ratio(3, 1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_regular_is_reproducible_and_regular() {
        let a = random_regular(40, 3, 11).unwrap();
        let b = random_regular(40, 3, 11).unwrap();
        assert_eq!(a, b);
        assert!((0..40).all(|v| a.degree(v) == 3));
        assert_ne!(a, random_regular(40, 3, 12).unwrap());
        assert!(random_regular(5, 3, 1).is_err());
    }

    #[test]
    fn perturbed_union_structure() {
        let j = perturbed_union(4, 3, WeightProfile::Uniform).unwrap();
        assert_eq!(j.vertex_count(), 20);
        let bridges = j.edges().iter().filter(|&&(u, v)| (u < 16) != (v < 16)).count();
        assert_eq!(bridges, 1);
        let h_mass = j.mass(16..20);
        assert!((h_mass - 4.0 / 20.0).abs() < 1e-12);

        let adv = perturbed_union(10, 3, WeightProfile::Adversarial).unwrap();
        assert!((adv.mass(100..110) - 0.5).abs() < 1e-12);
        assert!((adv.ratio_bound() - 10.0).abs() < 1e-9);
        assert!(perturbed_union(5, 1, WeightProfile::Uniform).is_err());
    }

    #[test]
    fn orbit_tree_root_ratios() {
        let g = orbit_tree(1).unwrap();
        assert_eq!(g.vertex_count(), 4);
        let mut r: Vec<f64> = g.neighbors(0).iter().map(|&y| g.ratio(0, y).unwrap()).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 0.5).abs() < 1e-15);
        assert!((r[2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn orbit_tree_every_interior_vertex_has_one_heavy_neighbour() {
        let g = orbit_tree(4).unwrap();
        assert_eq!(g.vertex_count(), 1 + 3 + 6 + 12 + 24);
        for v in 0..g.vertex_count() {
            if g.degree(v) == 3 {
                let heavy = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&y| g.ratio(v, y).unwrap() > 1.5)
                    .count();
                assert_eq!(heavy, 1);
            }
        }
    }

    #[test]
    fn layered_weights_examples() {
        let p5 = path(5).unwrap();
        let g = layered_weights(&p5, 0, LayerMode::ExpBeta { beta: 0.0 }).unwrap();
        assert!(g.probabilities().iter().all(|&p| p == 0.2));
        let g = layered_weights(&p5, 0, LayerMode::InverseSphere).unwrap();
        assert!(g.probabilities().iter().all(|&p| p == 0.2));

        let t = binary_tree(6, 0.0).unwrap();
        let layered = layered_weights(&t, 0, LayerMode::ExpBeta { beta: LN_2 }).unwrap();
        assert_eq!(layered, binary_tree(6, LN_2).unwrap());

        let inv = layered_weights(&t, 0, LayerMode::InverseSphere).unwrap();
        for m in layer_masses(&inv, 6) {
            assert!((m - 1.0 / 6.0).abs() < 1e-12);
        }

        let disconnected = WeightedGraph::uniform(3, &[(0, 1)], 2).unwrap();
        assert!(matches!(
            layered_weights(&disconnected, 0, LayerMode::InverseSphere),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn spec_round_trip() {
        let spec = GeneratorSpec::PerturbedUnion {
            n: 4,
            seed: 9,
            profile: WeightProfile::Adversarial,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"perturbed_union\""));
        let back: GeneratorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.generate().unwrap(), spec.generate().unwrap());
    }
}
