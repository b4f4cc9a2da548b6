//! Edit distances, weighted edit distances, and exact distances to
//! subgraph-closed properties.
//!
//! For a property `P` closed under subgraphs the infimum over targets `(H, q)`
//! is attained by deleting edges only, with `q = p`: if `(H, q) ∈ P`, then the
//! common subgraph `G ∩ H` is also in `P`, and it pays only for `E(G) \ E(H)`,
//! which `(H, q)` pays too (at weights `p`, since the deleted edges' cost is
//! `wp_G`); added edges only add cost. So the distance is the least `wp`-mass of
//! an edge set whose removal puts `G` in `P`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{exact_rational, WeightedGraph};
use crate::properties::{min_monochromatic_cost, EdgeGraph, PropertySpec};
use crate::simplex::{rational, LinearProgram, LpOutcome, Relation};

pub const MAX_EDIT_VERTICES: usize = 9;
pub const MAX_DELETION_EDGES: usize = 24;
pub const MAX_ABSOLUTE_EDGES: usize = 16;

/// `min_H' |E(G) △ E(H')| / (d |V(G)|)` over relabelings `H'` of `H`, with `d`
/// the degree bound of `G`.
pub fn edit_distance_uniform(g: &WeightedGraph, h: &WeightedGraph) -> Result<f64> {
    let n = g.vertex_count();
    if h.vertex_count() != n {
        return Err(Error::SizeMismatch(n, h.vertex_count()));
    }
    if n > MAX_EDIT_VERTICES {
        return Err(Error::TooLarge(format!(
            "edit distance enumerates all bijections; {n} > {MAX_EDIT_VERTICES} vertices"
        )));
    }
    let masks = |x: &WeightedGraph| -> Vec<u16> {
        (0..n)
            .map(|v| x.neighbors(v).iter().fold(0u16, |m, &w| m | 1 << w))
            .collect()
    };
    let (ga, ha) = (masks(g), masks(h));
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    let mut eval = |perm: &[usize]| {
        let mut diff = 0;
        for u in 0..n {
            let mut mapped = 0u16;
            for v in 0..n {
                if ha[perm[u]] >> perm[v] & 1 == 1 {
                    mapped |= 1 << v;
                }
            }
            diff += ((ga[u] ^ mapped) >> (u + 1)).count_ones() as usize;
        }
        best = best.min(diff);
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    eval(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            eval(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(best as f64 / (g.degree_bound() * n) as f64)
}

/// `Σ_{e ∈ E(G)\E(H)} wp_G(e) + Σ_{f ∈ E(H)\E(G)} wp_H(f)` on a shared vertex set.
pub fn weighted_edit_distance(gp: &WeightedGraph, hq: &WeightedGraph) -> Result<f64> {
    if gp.vertex_count() != hq.vertex_count() {
        return Err(Error::VertexSetMismatch(gp.vertex_count(), hq.vertex_count()));
    }
    let mut total = 0.0;
    for (u, v) in gp.edges() {
        if !hq.is_adjacent(u, v) {
            total += gp.edge_mass(u, v);
        }
    }
    for (u, v) in hq.edges() {
        if !gp.is_adjacent(u, v) {
            total += hq.edge_mass(u, v);
        }
    }
    Ok(total)
}

/// A distance with one optimal set of deleted edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub distance: f64,
    pub witness_deletion_set: Vec<(usize, usize)>,
}

fn edge_graph(g: &WeightedGraph) -> EdgeGraph {
    EdgeGraph::new(g.vertex_count(), g.edges())
}

/// `dist_K((G, p_G), P)`: the least `wp`-mass of edges whose deletion puts `G`
/// in `P`. Branches on the edges of a smallest violating structure (every
/// feasible deletion set must hit it) and prunes by the best cost found.
pub fn distance_to_property(gp: &WeightedGraph, p: &PropertySpec) -> Result<DistanceResult> {
    let eg = edge_graph(gp);
    let m = eg.m();
    if m > MAX_DELETION_EDGES {
        return Err(Error::TooLarge(format!(
            "{m} edges exceed the brute-force limit of {MAX_DELETION_EDGES}"
        )));
    }
    let wp: Vec<f64> = eg.edges.iter().map(|&(u, v)| gp.edge_mass(u, v)).collect();
    let deleted: Vec<usize> = match p {
        PropertySpec::KColorable { k } => min_monochromatic_cost(&eg, eg.all_alive(), *k, &wp)?.1,
        _ => {
            let mut search = DeletionSearch {
                eg: &eg,
                p,
                wp: &wp,
                seen: HashSet::new(),
                best_cost: wp.iter().sum::<f64>() * (1.0 + 1e-9) + 1e-300,
                best: None,
            };
            search.run(0, 0.0);
            let mask = search.best.expect("deleting every edge satisfies the property");
            (0..m).filter(|&e| mask >> e & 1 == 1).collect()
        }
    };
    Ok(DistanceResult {
        distance: deleted.iter().fold(0.0, |acc, &e| acc + wp[e]),
        witness_deletion_set: deleted.iter().map(|&e| eg.edges[e]).collect(),
    })
}

struct DeletionSearch<'a> {
    eg: &'a EdgeGraph,
    p: &'a PropertySpec,
    wp: &'a [f64],
    seen: HashSet<u32>,
    best_cost: f64,
    best: Option<u32>,
}

impl DeletionSearch<'_> {
    fn run(&mut self, mask: u32, cost: f64) {
        if cost >= self.best_cost || !self.seen.insert(mask) {
            return;
        }
        let alive = (0..self.eg.m()).map(|e| mask >> e & 1 == 0).collect();
        match self.eg.violation(self.p, alive) {
            None => {
                self.best_cost = cost;
                self.best = Some(mask);
            }
            Some(mut structure) => {
                structure.sort_by(|&a, &b| self.wp[a].total_cmp(&self.wp[b]).then(a.cmp(&b)));
                for e in structure {
                    self.run(mask | 1 << e, cost + self.wp[e]);
                }
            }
        }
    }
}

/// All inclusion-minimal edge sets (as bitmasks) whose deletion puts the
/// graph in `P`.
fn minimal_deletion_sets(eg: &EdgeGraph, p: &PropertySpec) -> Result<Vec<u32>> {
    let m = eg.m();
    let mut feasible = vec![false; 1 << m];
    for mask in 0u32..(1 << m) {
        let alive: Vec<bool> = (0..m).map(|e| mask >> e & 1 == 0).collect();
        feasible[mask as usize] = match p {
            PropertySpec::KColorable { k } => {
                min_monochromatic_cost(eg, alive, *k, &vec![1.0; m])?.0 == 0.0
            }
            _ => eg.violation(p, alive).is_none(),
        };
    }
    Ok((0u32..(1 << m))
        .filter(|&mask| {
            feasible[mask as usize]
                && (0..m).all(|e| mask >> e & 1 == 0 || !feasible[(mask & !(1 << e)) as usize])
        })
        .collect())
}

/// The worst case of [`distance_to_property`] over all distributions with
/// ratio bound `K` on the topology of `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteDistance {
    pub distance: f64,
    /// Exact optimum as `numerator/denominator`.
    pub exact: String,
    /// A maximizing distribution.
    pub distribution: Vec<f64>,
}

/// `sup_p dist_K((G, p), P)` over distributions with `p(u) ≤ K p(v)` on edges.
///
/// The objective `min_D Σ_{e∈D} wp(e)` over minimal deletion sets `D` is
/// concave and piecewise linear in `p`, so the supremum is the linear program
/// `max s` subject to `s ≤ Σ_{e∈D} (p_u + p_v)` for every `D`, `Σ p = 1`,
/// `p_u ≤ K p_v` along edges, `p ≥ 0`; it is solved exactly.
pub fn absolute_distance(g: &WeightedGraph, p: &PropertySpec, k: f64) -> Result<AbsoluteDistance> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("ratio bound must be >= 1, got {k}")));
    }
    let eg = edge_graph(g);
    let n = eg.n;
    let m = eg.m();
    if m > MAX_ABSOLUTE_EDGES {
        return Err(Error::TooLarge(format!(
            "{m} edges exceed the limit of {MAX_ABSOLUTE_EDGES} for the absolute distance"
        )));
    }
    let sets = minimal_deletion_sets(&eg, p)?;
    if sets.contains(&0) {
        let uniform = vec![1.0 / n as f64; n];
        return Ok(AbsoluteDistance {
            distance: 0.0,
            exact: "0/1".into(),
            distribution: uniform,
        });
    }
    // Variables: p_0..p_{n-1}, s.
    let zero = || BigRational::zero();
    let mut objective = vec![zero(); n + 1];
    objective[n] = rational(1);
    let mut lp = LinearProgram::new(n + 1, objective);
    for &mask in &sets {
        let mut row = vec![zero(); n + 1];
        row[n] = rational(1);
        for e in 0..m {
            if mask >> e & 1 == 1 {
                let (u, v) = eg.edges[e];
                row[u] -= rational(1);
                row[v] -= rational(1);
            }
        }
        lp.add(row, Relation::Le, zero());
    }
    let mut sum = vec![rational(1); n + 1];
    sum[n] = zero();
    lp.add(sum, Relation::Eq, rational(1));
    let k_exact = exact_rational(k);
    for &(u, v) in &eg.edges {
        for (a, b) in [(u, v), (v, u)] {
            let mut row = vec![zero(); n + 1];
            row[a] = rational(1);
            row[b] = -k_exact.clone();
            lp.add(row, Relation::Le, zero());
        }
    }
    match lp.maximize() {
        LpOutcome::Optimal { value, solution } => Ok(AbsoluteDistance {
            distance: to_f64(&value),
            exact: format!("{}/{}", value.numer(), value.denom()),
            distribution: solution[..n].iter().map(to_f64).collect(),
        }),
        other => Err(Error::Infeasible(format!("absolute distance program: {other:?}"))),
    }
}

fn to_f64(x: &BigRational) -> f64 {
    let (num, den): (&BigInt, &BigInt) = (x.numer(), x.denom());
    match (num.to_f64(), den.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => x.to_f64().unwrap_or(f64::NAN),
    }
}

/// Smallest cycle length `N_ε = ⌈2/ε⌉` from which `C_n` is `ε`-close to being a
/// forest in the absolute sense (`absolute_distance(C_n, forest) = 2/n`).
pub fn cycle_closeness_threshold(epsilon: f64) -> usize {
    let x = 2.0 / epsilon;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x {
        r as usize
    } else {
        x.ceil() as usize
    }
}
