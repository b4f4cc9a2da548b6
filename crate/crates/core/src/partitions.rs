//! Hyperfinite decompositions: heuristic constructors and exact verifiers.
//!
//! Verifiers label components with a union-find of their own, independent of
//! the breadth-first search the constructors use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Slack on mass comparisons, for sums of many small probabilities.
const MASS_SLACK: f64 = 1e-12;

/// `Y` with `p(Y) ≤ ε` such that every component of `G − Y` has at most
/// `component_bound` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub removed: Vec<usize>,
    pub epsilon: f64,
    pub component_bound: usize,
    /// Component sizes of `G − Y`, largest first.
    pub component_sizes: Vec<usize>,
}

/// Removal sets `Y_1..Y_L` for uniform hyperfiniteness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformCoverCertificate {
    pub covers: Vec<Vec<usize>>,
    pub epsilon: f64,
    pub component_bound: usize,
}

/// Families with a shift construction for uniform covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum CoverFamily {
    Path,
    Cycle,
    /// Vertex `(i, j)` has id `i * cols + j`, as built by the grid generator.
    Grid { rows: usize, cols: usize },
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        let (big, small) = if self.size[a] >= self.size[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}

/// Component sizes of `G − removed`, largest first; `None` if `removed` has
/// an out-of-range or repeated vertex.
fn component_sizes_without(g: &WeightedGraph, removed: &[usize]) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    let mut gone = vec![false; n];
    for &y in removed {
        if y >= n || gone[y] {
            return None;
        }
        gone[y] = true;
    }
    let mut uf = UnionFind::new(n);
    for (u, v) in g.edges() {
        if !gone[u] && !gone[v] {
            uf.union(u, v);
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&v| !gone[v] && uf.find(v) == v).collect();
    let mut sizes: Vec<usize> = roots.iter().map(|&v| uf.size[v]).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Some(sizes)
}

/// Whether `p(Y) ≤ ε` and every component of `G − Y` has at most
/// `component_bound` vertices. The recorded sizes must match too.
pub fn verify_weighted_partition(g: &WeightedGraph, cert: &PartitionCertificate) -> bool {
    let Some(sizes) = component_sizes_without(g, &cert.removed) else {
        return false;
    };
    let mass = g.mass(cert.removed.iter().copied());
    mass <= cert.epsilon + MASS_SLACK
        && sizes.iter().all(|&s| s <= cert.component_bound)
        && sizes == cert.component_sizes
}

/// Default component bound `⌈2/ε⌉ − 1`.
pub fn default_component_bound(epsilon: f64) -> usize {
    tolerant_ceil(2.0 / epsilon).saturating_sub(1).max(1)
}

/// `⌈x⌉`, treating values within `1e-9` relative of an integer as that integer.
pub(crate) fn tolerant_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `⌊x⌋` with the same tolerance.
pub(crate) fn tolerant_floor(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

/// Ball cutting. Seeds are taken heaviest first (ties by id). From each seed a
/// breadth-first region grows inside the unassigned vertices; the region stops
/// at the first radius whose outer sphere has mass at most `ε/2` of the
/// interior, or, if none exists within `k_target` vertices, at the radius with
/// the lightest sphere relative to the interior. The sphere goes to `Y`. A last
/// pass returns vertices of `Y` whose neighbouring components fit together.
/// On forests a bottom-up cutting is also tried and the lighter `Y` is kept.
///
/// `k_target` defaults to [`default_component_bound`] and is never exceeded.
pub fn find_weighted_partition(
    g: &WeightedGraph,
    epsilon: f64,
    k_target: Option<usize>,
) -> Result<PartitionCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let bound = k_target.unwrap_or_else(|| default_component_bound(epsilon));
    if bound == 0 {
        return Err(Error::InvalidParameter("component bound must be at least 1".into()));
    }
    let n = g.vertex_count();
    let lw = g.log_weights();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lw[b].total_cmp(&lw[a]).then(a.cmp(&b)));

    // 0 = unassigned, 1 = in a component, 2 = removed.
    let mut state = vec![0u8; n];
    let mut stamp = vec![usize::MAX; n];
    for (seed_index, &seed) in order.iter().enumerate() {
        if state[seed] != 0 {
            continue;
        }
        let scale = lw[seed];
        let rel = |v: usize| (lw[v] - scale).exp();
        let mut layers: Vec<Vec<usize>> = vec![vec![seed]];
        stamp[seed] = seed_index;
        let mut interior_size = 1;
        let mut interior_mass = 1.0;
        // (score, k): cut after layer k.
        let mut chosen: Option<usize> = None;
        let mut best: (f64, usize) = (f64::INFINITY, 0);
        loop {
            let last = layers.last().expect("at least one layer");
            let mut next = Vec::new();
            for &u in last {
                for &w in g.neighbors(u) {
                    if state[w] == 0 && stamp[w] != seed_index {
                        stamp[w] = seed_index;
                        next.push(w);
                    }
                }
            }
            let k = layers.len() - 1;
            let sphere_mass: f64 = next.iter().map(|&v| rel(v)).sum();
            let score = sphere_mass / interior_mass;
            if score <= best.0 {
                best = (score, k);
            }
            if next.is_empty() || score <= epsilon / 2.0 {
                chosen = Some(k);
                layers.push(next);
                break;
            }
            let grown = interior_size + next.len();
            if grown > bound {
                layers.push(next);
                break;
            }
            interior_size = grown;
            interior_mass += sphere_mass;
            layers.push(next);
        }
        let k = chosen.unwrap_or(best.1);
        for layer in &layers[..=k] {
            for &v in layer {
                state[v] = 1;
            }
        }
        for &v in &layers[k + 1] {
            state[v] = 2;
        }
    }

    // Return removed vertices whose neighbouring components still fit.
    let mut removed: Vec<usize> = (0..n).filter(|&v| state[v] == 2).collect();
    removed.sort_by(|&a, &b| lw[b].total_cmp(&lw[a]).then(a.cmp(&b)));
    let mut comp = vec![usize::MAX; n];
    let mut sizes: Vec<usize> = Vec::new();
    for s in 0..n {
        if state[s] != 1 || comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in g.neighbors(u) {
                if state[w] == 1 && comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    let mut alias: Vec<usize> = (0..sizes.len()).collect();
    fn root(alias: &mut [usize], mut c: usize) -> usize {
        while alias[c] != c {
            alias[c] = alias[alias[c]];
            c = alias[c];
        }
        c
    }
    for &y in &removed {
        let mut touching: Vec<usize> = g
            .neighbors(y)
            .iter()
            .filter(|&&w| state[w] == 1)
            .map(|&w| root(&mut alias, comp[w]))
            .collect();
        touching.sort_unstable();
        touching.dedup();
        let merged = 1 + touching.iter().map(|&c| sizes[c]).sum::<usize>();
        if merged > bound {
            continue;
        }
        state[y] = 1;
        let id = match touching.first() {
            Some(&c) => c,
            None => {
                sizes.push(0);
                alias.push(alias.len());
                sizes.len() - 1
            }
        };
        for &c in &touching[touching.len().min(1)..] {
            alias[c] = id;
        }
        sizes[id] = merged;
        comp[y] = id;
    }

    let mut removed: Vec<usize> = (0..n).filter(|&v| state[v] == 2).collect();
    if g.edge_count() + count_components(g) == n {
        let alt = forest_cutting(g, bound);
        if g.mass(alt.iter().copied()) < g.mass(removed.iter().copied()) {
            removed = alt;
        }
    }
    let mass = g.mass(removed.iter().copied());
    if mass > epsilon + MASS_SLACK {
        return Err(Error::Infeasible(format!(
            "removed mass {mass:.6} exceeds epsilon {epsilon} with components of at most {bound} vertices"
        )));
    }
    let component_sizes = component_sizes_without(g, &removed).expect("removed set is valid");
    Ok(PartitionCertificate {
        removed,
        epsilon,
        component_bound: component_sizes.first().copied().unwrap_or(0).max(1),
        component_sizes,
    })
}

fn count_components(g: &WeightedGraph) -> usize {
    let labels = g.component_labels();
    let mut seen = vec![false; labels.len()];
    labels.into_iter().filter(|&c| !std::mem::replace(&mut seen[c], true)).count()
}

/// Bottom-up cutting for forests. When the open part of a subtree exceeds
/// `bound`, either its root is removed or the cheapest (by mass per vertex)
/// child parts are cut off, whichever removes less mass.
fn forest_cutting(g: &WeightedGraph, bound: usize) -> Vec<usize> {
    let n = g.vertex_count();
    let p = g.probabilities();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    for r in 0..n {
        if parent[r] != usize::MAX {
            continue;
        }
        parent[r] = r;
        let start = order.len();
        order.push(r);
        let mut i = start;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &w in g.neighbors(u) {
                if parent[w] == usize::MAX {
                    parent[w] = u;
                    order.push(w);
                }
            }
        }
    }
    let mut open = vec![0usize; n];
    let mut cut = vec![false; n];
    for &v in order.iter().rev() {
        let mut kids: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&c| parent[c] == v && c != v && open[c] > 0)
            .collect();
        let size = 1 + kids.iter().map(|&c| open[c]).sum::<usize>();
        if size <= bound {
            open[v] = size;
            continue;
        }
        kids.sort_by(|&a, &b| (p[a] / open[a] as f64).total_cmp(&(p[b] / open[b] as f64)).then(a.cmp(&b)));
        let mut left = size;
        let mut dropped = Vec::new();
        let mut cost = 0.0;
        for &c in &kids {
            if left <= bound {
                break;
            }
            left -= open[c];
            cost += p[c];
            dropped.push(c);
        }
        if p[v] <= cost {
            cut[v] = true;
            open[v] = 0;
        } else {
            for c in dropped {
                cut[c] = true;
            }
            open[v] = left;
        }
    }
    (0..n).filter(|&v| cut[v]).collect()
}

/// Checks the three conditions: every `|Y_i| < ε n`, every component of
/// `G − Y_i` has at most `component_bound` vertices, and every vertex lies in
/// fewer than `ε L` of the sets.
pub fn verify_uniform_cover(g: &WeightedGraph, cert: &UniformCoverCertificate) -> bool {
    let n = g.vertex_count();
    let l = cert.covers.len();
    if l == 0 {
        return false;
    }
    let mut count = vec![0usize; n];
    for y in &cert.covers {
        if y.len() as f64 >= cert.epsilon * n as f64 {
            return false;
        }
        let Some(sizes) = component_sizes_without(g, y) else {
            return false;
        };
        if sizes.iter().any(|&s| s > cert.component_bound) {
            return false;
        }
        for &v in y {
            count[v] += 1;
        }
    }
    count.iter().all(|&c| (c as f64) < cert.epsilon * l as f64)
}

fn matches_family(g: &WeightedGraph, family: CoverFamily) -> bool {
    let n = g.vertex_count();
    let edges = g.edges();
    match family {
        CoverFamily::Path => {
            edges.len() + 1 == n && edges.iter().enumerate().all(|(i, &e)| e == (i, i + 1))
        }
        CoverFamily::Cycle => {
            n >= 3
                && edges.len() == n
                && (0..n).all(|i| g.is_adjacent(i, (i + 1) % n))
        }
        CoverFamily::Grid { rows, cols } => {
            rows * cols == n
                && edges.len() == rows * cols.saturating_sub(1) + cols * rows.saturating_sub(1)
                && (0..rows).all(|i| {
                    (0..cols).all(|j| {
                        let v = i * cols + j;
                        (j + 1 == cols || g.is_adjacent(v, v + 1))
                            && (i + 1 == rows || g.is_adjacent(v, v + cols))
                    })
                })
        }
    }
}

/// Shift construction: with spacing `m = ⌈2/ε⌉` on paths and cycles, cover
/// `j` removes the vertices at positions `≡ j (mod m)`; on grids, with
/// `m = ⌊2/ε⌋ + 1`, it removes the rows and columns `≡ j (mod m)`. Graphs with
/// at most `K_ε` vertices get the single empty cover.
pub fn build_uniform_cover(
    g: &WeightedGraph,
    epsilon: f64,
    family: CoverFamily,
) -> Result<UniformCoverCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !matches_family(g, family) {
        return Err(Error::UnsupportedFamily(format!(
            "graph does not have the vertex layout of {family:?}"
        )));
    }
    let n = g.vertex_count();
    let (m, bound) = match family {
        CoverFamily::Path | CoverFamily::Cycle => {
            let m = tolerant_ceil(2.0 / epsilon);
            (m, m - 1)
        }
        CoverFamily::Grid { .. } => {
            let m = tolerant_floor(2.0 / epsilon) + 1;
            (m, (m - 1) * (m - 1))
        }
    };
    let covers: Vec<Vec<usize>> = if n <= bound {
        vec![Vec::new()]
    } else {
        (0..m)
            .map(|j| match family {
                CoverFamily::Path | CoverFamily::Cycle => (j..n).step_by(m).collect(),
                CoverFamily::Grid { cols, .. } => (0..n)
                    .filter(|&v| (v / cols) % m == j || (v % cols) % m == j)
                    .collect(),
            })
            .collect()
    };
    let cert = UniformCoverCertificate {
        covers,
        epsilon,
        component_bound: bound,
    };
    if !verify_uniform_cover(g, &cert) {
        return Err(Error::UnsupportedFamily(format!(
            "shift construction fails on this {family:?} at epsilon {epsilon}"
        )));
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{binary_tree, cycle, grid, path};

    #[test]
    fn empty_removal_on_small_components() {
        let g = WeightedGraph::uniform(4, &[(0, 1), (2, 3)], 1).unwrap();
        let cert = PartitionCertificate {
            removed: vec![],
            epsilon: 0.1,
            component_bound: 2,
            component_sizes: vec![2, 2],
        };
        assert!(verify_weighted_partition(&g, &cert));
    }

    #[test]
    fn every_tenth_vertex_of_a_cycle() {
        let g = cycle(100).unwrap();
        let removed: Vec<usize> = (0..100).step_by(10).collect();
        let mut cert = PartitionCertificate {
            removed,
            epsilon: 0.1,
            component_bound: 9,
            component_sizes: vec![9; 10],
        };
        assert!(verify_weighted_partition(&g, &cert));
        cert.epsilon = 0.05;
        assert!(!verify_weighted_partition(&g, &cert));
        cert.epsilon = 0.1;
        cert.component_bound = 8;
        assert!(!verify_weighted_partition(&g, &cert));
    }

    #[test]
    fn uniform_path_cuts_every_twentieth_vertex() {
        let g = path(400).unwrap();
        let cert = find_weighted_partition(&g, 0.1, None).unwrap();
        assert!(verify_weighted_partition(&g, &cert));
        assert!(cert.component_bound <= 19);
        assert_eq!(cert.removed.len(), 400 / 20);
    }

    #[test]
    fn critical_trees_partition_with_a_large_bound() {
        for n in 12..=16 {
            let g = binary_tree(n, std::f64::consts::LN_2).unwrap();
            let cert = find_weighted_partition(&g, 0.1, Some(1023)).unwrap();
            assert!(verify_weighted_partition(&g, &cert), "n = {n}");
        }
    }

    #[test]
    fn small_graphs_need_no_cuts() {
        let g = cycle(10).unwrap();
        let cert = find_weighted_partition(&g, 0.2, Some(10)).unwrap();
        assert!(cert.removed.is_empty());
        assert_eq!(cert.component_sizes, vec![10]);
    }

    #[test]
    fn uniform_cover_examples() {
        let c = cycle(100).unwrap();
        let cert = build_uniform_cover(&c, 0.1, CoverFamily::Cycle).unwrap();
        assert_eq!(cert.covers.len(), 20);
        let mut count = vec![0; 100];
        for y in &cert.covers {
            for &v in y {
                count[v] += 1;
            }
        }
        assert!(count.iter().all(|&k| k == 1));

        let p = path(50).unwrap();
        let cert = build_uniform_cover(&p, 0.2, CoverFamily::Path).unwrap();
        assert_eq!(cert.covers.len(), 10);
        assert_eq!(cert.component_bound, 9);

        let one = WeightedGraph::uniform(1, &[], 1).unwrap();
        let cert = build_uniform_cover(&one, 0.3, CoverFamily::Path).unwrap();
        assert_eq!(cert.covers, vec![Vec::<usize>::new()]);
        assert!(verify_uniform_cover(&one, &cert));
    }

    #[test]
    fn tampered_cover_is_rejected() {
        let c = cycle(60).unwrap();
        let mut cert = build_uniform_cover(&c, 0.2, CoverFamily::Cycle).unwrap();
        cert.covers[3].clear();
        assert!(!verify_uniform_cover(&c, &cert));
    }

    #[test]
    fn grid_cover() {
        let g = grid(60, 60).unwrap();
        let cert = build_uniform_cover(&g, 0.2, CoverFamily::Grid { rows: 60, cols: 60 }).unwrap();
        assert_eq!(cert.covers.len(), 11);
        assert!(verify_uniform_cover(&g, &cert));
        assert!(build_uniform_cover(&g, 0.2, CoverFamily::Path).is_err());
    }
}
