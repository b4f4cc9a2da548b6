//! K-weighted graphs of bounded degree.
//!
//! A [`WeightedGraph`] stores an unnormalized natural-log weight per vertex.
//! The vertex distribution is `p(v) = exp(lw(v)) / Σ exp(lw(u))`; only ratios
//! of adjacent weights are ever needed by the oracles, so the absolute scale
//! of the weights is irrelevant and arbitrarily skewed distributions never
//! underflow in log space.

use std::collections::{HashSet, VecDeque};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest ratio bound recorded for graphs whose weights are constant along
/// every edge. The bound must be strictly larger than one.
pub const MIN_RATIO_BOUND: f64 = 1.0 + 1e-9;

/// Slack used when comparing a log-ratio against `ln K`.
const LOG_RATIO_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    degree_bound: usize,
    log_weights: Vec<f64>,
    ratio_bound: f64,
    log_norm: f64,
    probs: Vec<f64>,
}

/// On-disk graph format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphFile {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub edges: Vec<[usize; 2]>,
    pub log_weights: Vec<f64>,
}

/// Validates an edge list and weights and builds the graph.
pub fn build_graph(
    edges: &[(usize, usize)],
    log_weights: Vec<f64>,
    degree_bound: usize,
    ratio_bound: f64,
) -> Result<WeightedGraph> {
    let n = log_weights.len();
    if n == 0 {
        return Err(Error::InvalidSize("a graph needs at least one vertex".into()));
    }
    if degree_bound == 0 {
        return Err(Error::InvalidParameter("degree bound must be at least 1".into()));
    }
    if !(ratio_bound > 1.0) || !ratio_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ratio bound K must be a finite number > 1, got {ratio_bound}"
        )));
    }
    if let Some(w) = log_weights.iter().find(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite log weight {w}")));
    }

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut seen = HashSet::with_capacity(edges.len());
    for &(u, v) in edges {
        for x in [u, v] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::DuplicateEdge(key.0, key.1));
        }
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    for (v, nbrs) in adjacency.iter().enumerate() {
        if nbrs.len() > degree_bound {
            return Err(Error::DegreeExceeded {
                vertex: v,
                degree: nbrs.len(),
                bound: degree_bound,
            });
        }
    }
    let log_k = ratio_bound.ln();
    for &(u, v) in edges {
        let diff = (log_weights[v] - log_weights[u]).abs();
        if diff > log_k + LOG_RATIO_SLACK * log_k.max(1.0) {
            return Err(Error::RatioBoundViolated {
                u,
                v,
                ratio: diff.exp(),
                bound: ratio_bound,
            });
        }
    }

    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(2 * edges.len());
    offsets.push(0);
    for mut nbrs in adjacency {
        nbrs.sort_unstable();
        targets.extend_from_slice(&nbrs);
        offsets.push(targets.len());
    }
    let (log_norm, probs) = normalize(&log_weights);
    Ok(WeightedGraph {
        offsets,
        targets,
        degree_bound,
        log_weights,
        ratio_bound,
        log_norm,
        probs,
    })
}

/// Log-sum-exp normalizer and the normalized probabilities.
///
/// Probabilities are computed as `exp(lw - max) / Σ exp(lw - max)`, which is
/// exact for constant weights (`1/n`).
fn normalize(log_weights: &[f64]) -> (f64, Vec<f64>) {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    let probs = shifted.iter().map(|s| s / total).collect();
    (max + total.ln(), probs)
}

/// Smallest valid ratio bound for the given weights along the given edges.
pub fn minimal_ratio_bound(edges: &[(usize, usize)], log_weights: &[f64]) -> f64 {
    let max_diff = edges
        .iter()
        .map(|&(u, v)| (log_weights[u] - log_weights[v]).abs())
        .fold(0.0, f64::max);
    max_diff.exp().max(MIN_RATIO_BOUND)
}

impl WeightedGraph {
    /// Builds a graph with uniform weights, the smallest ratio bound and the
    /// given degree bound.
    pub fn uniform(n: usize, edges: &[(usize, usize)], degree_bound: usize) -> Result<Self> {
        build_graph(edges, vec![0.0; n], degree_bound, MIN_RATIO_BOUND)
    }

    /// Builds a graph whose degree bound is its maximum degree (at least 1) and
    /// whose ratio bound is the minimal valid one for `log_weights`.
    pub fn with_tight_bounds(edges: &[(usize, usize)], log_weights: Vec<f64>) -> Result<Self> {
        let n = log_weights.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u < n && v < n {
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let d = degree.into_iter().max().unwrap_or(0).max(1);
        let k = minimal_ratio_bound(
            &edges
                .iter()
                .copied()
                .filter(|&(u, v)| u < n && v < n)
                .collect::<Vec<_>>(),
            &log_weights,
        );
        build_graph(edges, log_weights, d, k)
    }

    pub fn vertex_count(&self) -> usize {
        self.log_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.vertex_count() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn log_weight(&self, v: usize) -> f64 {
        self.log_weights[v]
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Natural log of the normalizer `Σ exp(lw(v))`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn probability(&self, v: usize) -> f64 {
        self.probs[v]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probability(&self, v: usize) -> f64 {
        self.log_weights[v] - self.log_norm
    }

    pub fn mass<I: IntoIterator<Item = usize>>(&self, vertices: I) -> f64 {
        vertices.into_iter().fold(0.0, |acc, v| acc + self.probs[v])
    }

    /// Edge mass `p(u) + p(v)`.
    pub fn edge_mass(&self, u: usize, v: usize) -> f64 {
        self.probs[u] + self.probs[v]
    }

    /// The discrete Radon-Nikodym derivative `p(y) / p(x)` along the edge `(x, y)`.
    pub fn ratio(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.log_ratio(x, y)?.exp())
    }

    pub fn log_ratio(&self, x: usize, y: usize) -> Result<f64> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if !self.is_adjacent(x, y) {
            return Err(Error::NotAdjacent(x, y));
        }
        Ok(self.log_weights[y] - self.log_weights[x])
    }

    /// `ln p(y) - ln p(x)` as an exact rational; the log weights are dyadic
    /// rationals so the difference is representable without rounding.
    pub fn exact_log_ratio(&self, x: usize, y: usize) -> Result<BigRational> {
        self.log_ratio(x, y)?;
        Ok(exact_rational(self.log_weights[y]) - exact_rational(self.log_weights[x]))
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.vertex_count(),
            })
        }
    }

    /// Same graph and weights under a different (valid) degree and ratio bound.
    pub fn with_bounds(&self, degree_bound: usize, ratio_bound: f64) -> Result<Self> {
        build_graph(&self.edges(), self.log_weights.clone(), degree_bound, ratio_bound)
    }

    /// Same topology with new log weights and the minimal ratio bound.
    pub fn with_log_weights(&self, log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.len() != self.vertex_count() {
            return Err(Error::SizeMismatch(self.vertex_count(), log_weights.len()));
        }
        let edges = self.edges();
        let k = minimal_ratio_bound(&edges, &log_weights);
        build_graph(&edges, log_weights, self.degree_bound, k)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count();
        if perm.len() != n {
            return Err(Error::SizeMismatch(n, perm.len()));
        }
        let edges: Vec<_> = self.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut lw = vec![0.0; n];
        for v in 0..n {
            lw[perm[v]] = self.log_weights[v];
        }
        build_graph(&edges, lw, self.degree_bound, self.ratio_bound)
    }

    /// Copy of the graph with the listed edges removed; weights and bounds kept.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Self> {
        let removed: HashSet<(usize, usize)> =
            removed.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|e| !removed.contains(e))
            .collect();
        build_graph(&edges, self.log_weights.clone(), self.degree_bound, self.ratio_bound)
    }

    /// BFS distances from `source`; `usize::MAX` marks unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected component label per vertex, labels numbered by first vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.component_labels().iter().all(|&c| c == 0)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.vertex_count(),
            d: self.degree_bound,
            k: self.ratio_bound,
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            log_weights: self.log_weights.clone(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        if file.log_weights.len() != file.n {
            return Err(Error::SizeMismatch(file.n, file.log_weights.len()));
        }
        let edges: Vec<_> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        build_graph(&edges, file.log_weights.clone(), file.d, file.k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

pub(crate) fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn path(n: usize) -> Vec<(usize, usize)> {
        (1..n).map(|i| (i - 1, i)).collect()
    }

    #[test]
    fn uniform_path_has_uniform_probabilities() {
        let g = build_graph(&path(3), vec![0.0; 3], 2, 2.0).unwrap();
        for v in 0..3 {
            assert_eq!(g.probability(v), 1.0 / 3.0);
        }
    }

    #[test]
    fn ratio_bound_violation_is_rejected() {
        let err = build_graph(&[(0, 1)], vec![0.0, 3f64.ln()], 1, 2.0).unwrap_err();
        assert!(matches!(err, Error::RatioBoundViolated { .. }));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            build_graph(&[(0, 1), (1, 0)], vec![0.0; 2], 2, 2.0),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            build_graph(&[(1, 1)], vec![0.0; 2], 2, 2.0),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            build_graph(&[(0, 1), (0, 2), (0, 3)], vec![0.0; 4], 2, 2.0),
            Err(Error::DegreeExceeded { vertex: 0, degree: 3, bound: 2 })
        ));
        assert!(matches!(
            build_graph(&[(0, 5)], vec![0.0; 2], 2, 2.0),
            Err(Error::VertexOutOfRange { vertex: 5, n: 2 })
        ));
        assert!(build_graph(&[], vec![], 2, 2.0).is_err());
        assert!(build_graph(&[], vec![0.0], 2, 1.0).is_err());
    }

    #[test]
    fn ratio_is_normalizer_free_and_antisymmetric() {
        let g = build_graph(&path(3), vec![0.0, -std::f64::consts::LN_2, 0.0], 2, 2.0).unwrap();
        assert!(close(g.ratio(0, 1).unwrap(), 0.5, 1e-15));
        assert!(close(g.ratio(1, 0).unwrap(), 2.0, 1e-15));
        assert_eq!(g.log_ratio(0, 1).unwrap(), -g.log_ratio(1, 0).unwrap());
        assert!(matches!(g.ratio(0, 2), Err(Error::NotAdjacent(0, 2))));
    }

    #[test]
    fn probabilities_sum_to_one_under_extreme_skew() {
        let n = 2000;
        let lw: Vec<f64> = (0..n).map(|i| -0.69 * i as f64).collect();
        let g = build_graph(&path(n), lw, 2, 2.0).unwrap();
        let total: f64 = g.probabilities().iter().sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(g.log_probability(n - 1) < -1000.0);
    }

    #[test]
    fn json_round_trip() {
        let g = build_graph(&path(4), vec![0.0, 0.1, 0.2, 0.1], 2, 1.5).unwrap();
        let back = WeightedGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(g, back);
        let text = g.to_json().unwrap();
        assert!(text.contains("\"K\":1.5"));
    }

    #[test]
    fn permutation_preserves_structure() {
        let g = build_graph(&path(4), vec![0.0, 0.1, 0.2, 0.1], 2, 1.5).unwrap();
        let h = g.permuted(&[3, 1, 0, 2]).unwrap();
        assert!(h.is_adjacent(3, 1));
        assert!(h.is_adjacent(0, 2));
        assert_eq!(h.log_weight(0), 0.2);
    }
}
