//! Query models: the uniform sampling oracle, the Radon-Nikodym oracle of
//! depth `t`, and the deterministic observing oracle.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{extract_ball, LabeledBall};
use crate::canon::{canonical_graph_key, GraphKey};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Default cap on the number of isomorphism classes enumerated by [`observe`].
pub const DEFAULT_CLASS_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub radius: usize,
    pub depth: u32,
    pub query_budget: usize,
    pub seed: u64,
}

impl OracleConfig {
    pub fn new(radius: usize, depth: u32, query_budget: usize, seed: u64) -> Result<Self> {
        if query_budget == 0 {
            return Err(Error::InvalidParameter("query budget must be at least 1".into()));
        }
        Ok(OracleConfig {
            radius,
            depth,
            query_budget,
            seed,
        })
    }
}

/// RNG for query `index` of a run seeded with `seed`. Each index gets its own
/// ChaCha stream, so batches give the same answers in any order.
pub fn query_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One answered query: the sampled root and its ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub root: usize,
    pub ball: LabeledBall,
}

/// Samples `x` uniformly and returns its unlabeled `r`-ball.
pub fn uniform_query<R: Rng + ?Sized>(g: &WeightedGraph, r: usize, rng: &mut R) -> LabeledBall {
    let x = rng.random_range(0..g.vertex_count());
    extract_ball(g, x, r, 0).unlabeled()
}

/// Samples `x` with probability `p_G(x)` and returns its labeled `r`-ball.
///
/// Builds a fresh alias table, which costs `O(n)`; use [`RnOracle`] for
/// repeated queries.
pub fn rn_query<R: Rng + ?Sized>(g: &WeightedGraph, r: usize, t: u32, rng: &mut R) -> LabeledBall {
    RnOracle::new(g).query(r, t, rng).ball
}

/// Radon-Nikodym oracle with an alias table built once.
pub struct RnOracle<'a> {
    graph: &'a WeightedGraph,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl<'a> RnOracle<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Self {
        let alias = if graph.vertex_count() > 1 {
            Some(
                WeightedAliasIndex::new(graph.probabilities().to_vec())
                    .expect("probabilities are finite, non-negative and sum to one"),
            )
        } else {
            None
        };
        RnOracle { graph, alias }
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.graph
    }

    pub fn sample_root<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.alias {
            Some(a) => a.sample(rng),
            None => 0,
        }
    }

    pub fn query<R: Rng + ?Sized>(&self, r: usize, t: u32, rng: &mut R) -> Query {
        let root = self.sample_root(rng);
        Query {
            root,
            ball: extract_ball(self.graph, root, r, t),
        }
    }

    /// Roots of queries `0..count`, each drawn from its own stream.
    pub fn sample_roots(&self, count: usize, seed: u64) -> Vec<usize> {
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample_root(&mut query_rng(seed, i)))
            .collect()
    }

    /// Answers `cfg.query_budget` queries; query `i` uses stream `i`.
    pub fn run(&self, cfg: &OracleConfig) -> Vec<Query> {
        (0..cfg.query_budget as u64)
            .into_par_iter()
            .map(|i| self.query(cfg.radius, cfg.depth, &mut query_rng(cfg.seed, i)))
            .collect()
    }
}

/// Random bits for vertex decorations: `k` bits from stream `key`, round
/// `round` (later rounds re-draw after collisions).
pub fn decoration_bits(seed: u64, key: u64, round: u32, k: u32) -> u64 {
    let mut rng = query_rng(seed, key);
    let mut bits = 0;
    for _ in 0..=round {
        bits = rng.next_u64();
    }
    if k >= 64 {
        bits
    } else {
        bits & ((1u64 << k) - 1)
    }
}

/// Truth values `Q_G(H)` for connected graphs `H` up to `depth` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationTable {
    pub depth: usize,
    pub entries: BTreeMap<GraphKey, bool>,
}

impl ObservationTable {
    pub fn get(&self, h: &GraphKey) -> Option<bool> {
        self.entries.get(h).copied()
    }

    /// The entries for graphs with at most `s` vertices.
    pub fn restricted(&self, s: usize) -> ObservationTable {
        ObservationTable {
            depth: s.min(self.depth),
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| graph_key_order(k) <= s)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

/// Number of vertices encoded in a [`GraphKey`].
pub fn graph_key_order(key: &GraphKey) -> usize {
    let b = &key.0;
    u32::from_be_bytes([b[2], b[3], b[4], b[5]]) as usize
}

/// Key of the cycle `C_k`.
pub fn cycle_key(k: usize) -> GraphKey {
    let adj: Vec<Vec<usize>> = (0..k).map(|i| vec![(i + k - 1) % k, (i + 1) % k]).collect();
    canonical_graph_key(&adj)
}

/// Keys of all connected graphs with at most `s` vertices and maximum degree
/// at most `d`, built by adding one vertex at a time (every connected graph has
/// a vertex whose removal leaves it connected).
pub fn connected_graph_classes(s: usize, d: usize, cap: usize) -> Result<BTreeSet<GraphKey>> {
    let mut all = BTreeSet::new();
    if s == 0 {
        return Ok(all);
    }
    let mut layer: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new()]];
    all.insert(canonical_graph_key(&layer[0]));
    for k in 1..s {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for adj in &layer {
            let open: Vec<usize> = (0..k).filter(|&v| adj[v].len() < d).collect();
            for mask in 1u64..(1 << open.len()) {
                if mask.count_ones() as usize > d {
                    continue;
                }
                let mut grown = adj.clone();
                grown.push(Vec::new());
                for (i, &v) in open.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        grown[v].push(k);
                        grown[k].push(v);
                    }
                }
                let key = canonical_graph_key(&grown);
                if seen.insert(key.clone()) {
                    all.insert(key);
                    next.push(grown);
                    if all.len() > cap {
                        return Err(Error::BudgetExceeded(format!(
                            "more than {cap} connected classes with at most {s} vertices"
                        )));
                    }
                }
            }
        }
        layer = next;
    }
    Ok(all)
}

/// Calls `visit` on every connected vertex subset of size at most `s`, once
/// each (the ESU enumeration). Stops early when `visit` returns `false`.
pub fn for_each_connected_subset<F>(adj: &[Vec<usize>], s: usize, mut visit: F)
where
    F: FnMut(&[usize]) -> bool,
{
    fn extend<F: FnMut(&[usize]) -> bool>(
        adj: &[Vec<usize>],
        s: usize,
        root: usize,
        sub: &mut Vec<usize>,
        ext: Vec<usize>,
        in_sub_or_nbr: &mut Vec<u32>,
        visit: &mut F,
    ) -> bool {
        if !visit(sub) {
            return false;
        }
        if sub.len() == s {
            return true;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            let mut marked = Vec::new();
            for &u in &adj[w] {
                if u > root && in_sub_or_nbr[u] == 0 {
                    next.push(u);
                }
            }
            in_sub_or_nbr[w] += 1;
            marked.push(w);
            for &u in &adj[w] {
                in_sub_or_nbr[u] += 1;
                marked.push(u);
            }
            sub.push(w);
            let go_on = extend(adj, s, root, sub, next, in_sub_or_nbr, visit);
            sub.pop();
            for u in marked {
                in_sub_or_nbr[u] -= 1;
            }
            if !go_on {
                return false;
            }
        }
        true
    }

    if s == 0 {
        return;
    }
    let n = adj.len();
    // Count of subset members that are the vertex itself or a neighbour of it.
    let mut marks = vec![0u32; n];
    for v in 0..n {
        marks[v] += 1;
        for &u in &adj[v] {
            marks[u] += 1;
        }
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        let mut sub = vec![v];
        let go_on = extend(adj, s, v, &mut sub, ext, &mut marks, &mut visit);
        marks[v] -= 1;
        for &u in &adj[v] {
            marks[u] -= 1;
        }
        if !go_on {
            return;
        }
    }
}

fn induced_adjacency(adj: &[Vec<usize>], subset: &[usize]) -> Vec<Vec<usize>> {
    subset
        .iter()
        .map(|&v| {
            adj[v]
                .iter()
                .filter_map(|w| subset.iter().position(|x| x == w))
                .collect()
        })
        .collect()
}

fn adjacency_lists(g: &WeightedGraph) -> Vec<Vec<usize>> {
    (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect()
}

/// Observing oracle: `Q_G(H)` for every connected `H` with at most `s`
/// vertices and maximum degree at most the degree bound of `G`.
pub fn observe(g: &WeightedGraph, s: usize) -> Result<ObservationTable> {
    observe_with_cap(g, s, DEFAULT_CLASS_CAP)
}

pub fn observe_with_cap(g: &WeightedGraph, s: usize, cap: usize) -> Result<ObservationTable> {
    if s == 0 {
        return Err(Error::InvalidParameter("observation depth must be at least 1".into()));
    }
    let universe = connected_graph_classes(s, g.degree_bound(), cap)?;
    let adj = adjacency_lists(g);
    let mut present = HashSet::new();
    let mut visited = 0usize;
    let mut over_budget = false;
    for_each_connected_subset(&adj, s, |subset| {
        visited += 1;
        if visited > cap.saturating_mul(1000) {
            over_budget = true;
            return false;
        }
        present.insert(canonical_graph_key(&induced_adjacency(&adj, subset)));
        true
    });
    if over_budget {
        return Err(Error::BudgetExceeded(format!(
            "more than {} connected subsets of size at most {s}",
            cap.saturating_mul(1000)
        )));
    }
    let entries = universe
        .into_iter()
        .map(|k| {
            let yes = present.contains(&k);
            (k, yes)
        })
        .collect();
    Ok(ObservationTable { depth: s, entries })
}

/// Lengths `k ≤ max_len` such that `G` has an induced cycle `C_k`.
pub fn induced_cycle_lengths(g: &WeightedGraph, max_len: usize) -> BTreeSet<usize> {
    let n = g.vertex_count();
    let mut found = BTreeSet::new();
    let mut on_path = vec![false; n];
    // Induced paths starting at their minimum vertex `v`.
    fn grow(
        g: &WeightedGraph,
        v: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        max_len: usize,
        found: &mut BTreeSet<usize>,
    ) {
        let last = *path.last().expect("path is never empty");
        for &w in g.neighbors(last) {
            if w <= v || on_path[w] {
                continue;
            }
            // `w` may touch only `last` and possibly the start among path vertices.
            let touches_start = path.len() >= 2 && g.is_adjacent(w, v);
            let chord = path.len() >= 2 && path[1..path.len() - 1].iter().any(|&u| g.is_adjacent(w, u));
            if chord {
                continue;
            }
            if touches_start {
                if path.len() >= 2 && path.len() < max_len {
                    found.insert(path.len() + 1);
                }
                continue;
            }
            if path.len() + 1 < max_len {
                on_path[w] = true;
                path.push(w);
                grow(g, v, path, on_path, max_len, found);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    for v in 0..n {
        on_path[v] = true;
        let mut path = vec![v];
        grow(g, v, &mut path, &mut on_path, max_len, &mut found);
        on_path[v] = false;
    }
    found
}

/// Observation table restricted to the cycles `C_3..C_s`.
pub fn observe_cycles(g: &WeightedGraph, s: usize) -> ObservationTable {
    let lengths = induced_cycle_lengths(g, s);
    ObservationTable {
        depth: s,
        entries: (3..=s).map(|k| (cycle_key(k), lengths.contains(&k))).collect(),
    }
}
