//! Exact and empirical ball statistics, the statistical distance `d_S`, and
//! the entropy functionals. Entropies are in nats.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::extract_ball;
use crate::canon::{canonicalize, CanonicalBallKey};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::oracles::{OracleConfig, RnOracle};
use crate::quotient::TreeQuotient;

/// Mass above which the depth-`t` and depth-`t+1` partitions are flagged as
/// disagreeing.
pub const INSTABILITY_THRESHOLD: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsParams {
    pub d: usize,
    pub r: usize,
    #[serde(rename = "K")]
    pub k: f64,
    /// Truncation depth; `None` for unlabeled (uniform-mode) statistics.
    pub t: Option<u32>,
}

impl StatsParams {
    /// Whether `d`, `K` and `t` agree (radius may differ).
    pub fn compatible(&self, other: &StatsParams) -> bool {
        self.d == other.d
            && self.t == other.t
            && (self.k - other.k).abs() <= 1e-9 * self.k.max(other.k)
    }
}

/// A distribution over canonical labeled balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StatsFile", try_from = "StatsFile")]
pub struct BallStatistics {
    pub params: StatsParams,
    pub weights: BTreeMap<CanonicalBallKey, f64>,
    /// Number of sampled queries; 0 for exact statistics.
    pub total_queries: u64,
}

#[derive(Serialize, Deserialize)]
struct StatsEntry {
    key: CanonicalBallKey,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    params: StatsParams,
    entries: Vec<StatsEntry>,
    total_queries: u64,
}

impl From<BallStatistics> for StatsFile {
    fn from(s: BallStatistics) -> Self {
        StatsFile {
            params: s.params,
            entries: s
                .weights
                .into_iter()
                .map(|(key, weight)| StatsEntry { key, weight })
                .collect(),
            total_queries: s.total_queries,
        }
    }
}

impl TryFrom<StatsFile> for BallStatistics {
    type Error = String;

    fn try_from(f: StatsFile) -> std::result::Result<Self, String> {
        let mut weights = BTreeMap::new();
        for e in f.entries {
            if !(e.weight >= 0.0) {
                return Err(format!("negative weight for key {}", e.key));
            }
            if weights.insert(e.key, e.weight).is_some() {
                return Err("duplicate key in statistics".into());
            }
        }
        Ok(BallStatistics {
            params: f.params,
            weights,
            total_queries: f.total_queries,
        })
    }
}

impl BallStatistics {
    pub fn weight(&self, key: &CanonicalBallKey) -> f64 {
        self.weights.get(key).copied().unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Sums `(key, mass)` pairs in the given order, so results do not depend on
/// how the keys were computed.
fn accumulate(pairs: Vec<(CanonicalBallKey, f64)>) -> BTreeMap<CanonicalBallKey, f64> {
    let mut weights = BTreeMap::new();
    for (k, m) in pairs {
        *weights.entry(k).or_insert(0.0) += m;
    }
    weights
}

fn params_of(g: &WeightedGraph, r: usize, t: Option<u32>) -> StatsParams {
    StatsParams {
        d: g.degree_bound(),
        r,
        k: g.ratio_bound(),
        t,
    }
}

/// `Prob_G(B)` weighted by `p_G`: the weight of `B` is the total probability
/// of the roots whose labeled `r`-ball is `B`.
pub fn exact_stats(g: &WeightedGraph, r: usize, t: u32) -> BallStatistics {
    let pairs = (0..g.vertex_count())
        .into_par_iter()
        .map(|x| (canonicalize(&extract_ball(g, x, r, t)), g.probability(x)))
        .collect();
    BallStatistics {
        params: params_of(g, r, Some(t)),
        weights: accumulate(pairs),
        total_queries: 0,
    }
}

/// Classical `Prob_G(B)`: unlabeled balls counted over vertices.
pub fn exact_uniform_stats(g: &WeightedGraph, r: usize) -> BallStatistics {
    let n = g.vertex_count() as f64;
    let pairs = (0..g.vertex_count())
        .into_par_iter()
        .map(|x| (canonicalize(&extract_ball(g, x, r, 0).unlabeled()), 1.0 / n))
        .collect();
    BallStatistics {
        params: params_of(g, r, None),
        weights: accumulate(pairs),
        total_queries: 0,
    }
}

/// Exact statistics of the tree described by `q`, one class at a time.
pub fn exact_stats_quotient(q: &TreeQuotient, r: usize, t: u32) -> BallStatistics {
    let masses = q.class_masses();
    let pairs = (0..q.class_count())
        .into_par_iter()
        .map(|c| (canonicalize(&q.ball(c, r, t)), masses[c]))
        .collect();
    BallStatistics {
        params: StatsParams {
            d: q.degree_bound(),
            r,
            k: q.ratio_bound(),
            t: Some(t),
        },
        weights: accumulate(pairs),
        total_queries: 0,
    }
}

/// Frequencies of canonical keys over `cfg.query_budget` oracle queries.
pub fn empirical_stats(g: &WeightedGraph, cfg: &OracleConfig) -> BallStatistics {
    let queries = RnOracle::new(g).run(cfg);
    let keys: Vec<CanonicalBallKey> = queries.par_iter().map(|q| canonicalize(&q.ball)).collect();
    let mut counts: BTreeMap<CanonicalBallKey, u64> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    let total = cfg.query_budget as f64;
    BallStatistics {
        params: params_of(g, cfg.radius, Some(cfg.depth)),
        weights: counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect(),
        total_queries: cfg.query_budget as u64,
    }
}

/// Total variation distance `½ Σ |a(B) − b(B)|`.
pub fn total_variation(a: &BallStatistics, b: &BallStatistics) -> f64 {
    let mut sum = 0.0;
    for (k, &w) in &a.weights {
        sum += (w - b.weight(k)).abs();
    }
    for (k, &w) in &b.weights {
        if !a.weights.contains_key(k) {
            sum += w;
        }
    }
    0.5 * sum
}

/// `d_S = Σ_{r=1..r_max} 2^{-r} TV(a_r, b_r)`, where `a[r-1]` and `b[r-1]` are
/// the radius-`r` statistics. Truncating at `r_max` leaves a tail of at most
/// `2^{-r_max}`.
pub fn statistical_distance(
    a: &[BallStatistics],
    b: &[BallStatistics],
    r_max: usize,
) -> Result<f64> {
    if a.len() < r_max || b.len() < r_max {
        return Err(Error::ParamMismatch(format!(
            "need statistics for radii 1..={r_max}, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut total = 0.0;
    for r in 1..=r_max {
        let (x, y) = (&a[r - 1], &b[r - 1]);
        if x.params.r != r || y.params.r != r {
            return Err(Error::ParamMismatch(format!("statistics out of order at radius {r}")));
        }
        if !x.params.compatible(&y.params) {
            return Err(Error::ParamMismatch(format!(
                "incompatible parameters {:?} and {:?}",
                x.params, y.params
            )));
        }
        total += 0.5f64.powi(r as i32) * total_variation(x, y);
    }
    Ok(total)
}

/// `exact_stats` at radii `1..=r_max`.
pub fn exact_stats_by_radius(g: &WeightedGraph, r_max: usize, t: u32) -> Vec<BallStatistics> {
    (1..=r_max).map(|r| exact_stats(g, r, t)).collect()
}

/// `H(p_G) = Σ_v −p(v) ln p(v)`.
pub fn vertex_entropy(g: &WeightedGraph) -> f64 {
    (0..g.vertex_count())
        .map(|v| {
            let p = g.probability(v);
            if p > 0.0 {
                -p * g.log_probability(v)
            } else {
                0.0
            }
        })
        .sum()
}

/// `H_edge = Σ_v p(v) Σ_{y ~ v} −ln(p(y)/p(v))`.
pub fn edge_entropy(g: &WeightedGraph) -> f64 {
    (0..g.vertex_count())
        .map(|v| {
            let lw = g.log_weight(v);
            let out: f64 = g.neighbors(v).iter().map(|&y| lw - g.log_weight(y)).sum();
            g.probability(v) * out
        })
        .sum()
}

/// Agreement between the partitions of roots induced by depth `t` and `t+1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub t: u32,
    /// Mass of roots outside the heaviest depth-`t+1` class of their depth-`t`
    /// class.
    pub unstable_mass: f64,
    pub unstable: bool,
}

pub fn stability(g: &WeightedGraph, r: usize, t: u32) -> StabilityReport {
    let pairs: Vec<(CanonicalBallKey, CanonicalBallKey, f64)> = (0..g.vertex_count())
        .into_par_iter()
        .map(|x| {
            (
                canonicalize(&extract_ball(g, x, r, t)),
                canonicalize(&extract_ball(g, x, r, t + 1)),
                g.probability(x),
            )
        })
        .collect();
    let mut classes: BTreeMap<CanonicalBallKey, HashMap<CanonicalBallKey, f64>> = BTreeMap::new();
    for (coarse, fine, p) in pairs {
        *classes.entry(coarse).or_default().entry(fine).or_insert(0.0) += p;
    }
    let unstable_mass = classes
        .values()
        .map(|sub| {
            let total: f64 = sub.values().sum();
            let largest = sub.values().copied().fold(0.0, f64::max);
            total - largest
        })
        .sum();
    StabilityReport {
        t,
        unstable_mass,
        unstable: unstable_mass > INSTABILITY_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{binary_tree, cycle, path};
    use std::f64::consts::LN_2;

    #[test]
    fn uniform_cycle_has_one_ball() {
        let s = exact_stats(&cycle(9).unwrap(), 1, 2);
        assert_eq!(s.len(), 1);
        assert!((s.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_three_counts() {
        let s = exact_uniform_stats(&path(3).unwrap(), 1);
        let mut w: Vec<f64> = s.weights.values().copied().collect();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-15 && (w[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn critical_tree_star_weight() {
        for n in [5, 8, 11] {
            let g = binary_tree(n, LN_2).unwrap();
            let s = exact_stats(&g, 1, 2);
            let interior = canonicalize(&extract_ball(&g, 1, 1, 2));
            assert!((s.weight(&interior) - (n as f64 - 2.0) / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_matches_materialized_tree() {
        for n in [4, 7, 10] {
            let g = binary_tree(n, LN_2).unwrap();
            let q = TreeQuotient::binary_tree(n, LN_2).unwrap();
            for r in 1..=3 {
                let a = exact_stats(&g, r, 2);
                let b = exact_stats_quotient(&q, r, 2);
                assert_eq!(a.params, b.params);
                assert!(total_variation(&a, &b) < 1e-12, "n = {n}, r = {r}");
            }
        }
    }

    #[test]
    fn single_vertex_is_exact_after_one_query() {
        let g = WeightedGraph::uniform(1, &[], 1).unwrap();
        let cfg = OracleConfig::new(2, 2, 1, 3).unwrap();
        assert_eq!(total_variation(&empirical_stats(&g, &cfg), &exact_stats(&g, 2, 2)), 0.0);
    }

    #[test]
    fn distance_is_zero_on_itself_and_symmetric() {
        let a = exact_stats_by_radius(&path(7).unwrap(), 3, 2);
        let b = exact_stats_by_radius(&path(9).unwrap(), 3, 2);
        assert_eq!(statistical_distance(&a, &a, 3).unwrap(), 0.0);
        let ab = statistical_distance(&a, &b, 3).unwrap();
        assert!(ab > 0.0);
        assert_eq!(ab, statistical_distance(&b, &a, 3).unwrap());
    }

    #[test]
    fn distance_rejects_mismatched_parameters() {
        let a = exact_stats_by_radius(&path(7).unwrap(), 2, 2);
        let b = exact_stats_by_radius(&path(7).unwrap(), 2, 3);
        assert!(matches!(statistical_distance(&a, &b, 2), Err(Error::ParamMismatch(_))));
        assert!(matches!(statistical_distance(&a, &a, 3), Err(Error::ParamMismatch(_))));
    }

    #[test]
    fn entropy_examples() {
        let g = cycle(10).unwrap();
        assert!((vertex_entropy(&g) - 10f64.ln()).abs() < 1e-12);
        assert_eq!(edge_entropy(&g), 0.0);
    }

    #[test]
    fn small_tree_entropy_by_direct_summation() {
        // T_3 at ln 2: weights 1, 1/2 (x2), 1/4 (x4), total 3.
        let g = binary_tree(3, LN_2).unwrap();
        let probs = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0];
        let h: f64 = probs.iter().map(|p: &f64| -p * p.ln()).sum();
        assert!((vertex_entropy(&g) - h).abs() < 1e-12);
        // Root: two children at ratio 1/2; middle: parent at 2, children at 1/2;
        // leaves: parent at 2.
        let he = probs[0] * 2.0 * LN_2 + 2.0 * probs[1] * (LN_2) + 4.0 * probs[3] * (-LN_2);
        assert!((edge_entropy(&g) - he).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_are_stable() {
        let r = stability(&cycle(12).unwrap(), 2, 2);
        assert_eq!(r.unstable_mass, 0.0);
        assert!(!r.unstable);
    }

    #[test]
    fn labels_near_a_decimal_boundary_are_unstable() {
        // Ratios 1.0049 and 1.0031 agree at two digits but split at three.
        let lw = vec![0.0, 1.0049f64.ln(), 0.0, 1.0031f64.ln()];
        let g = build(&[(0, 1), (2, 3)], lw);
        let r = stability(&g, 1, 2);
        assert!(r.unstable);
    }

    fn build(edges: &[(usize, usize)], lw: Vec<f64>) -> WeightedGraph {
        WeightedGraph::with_tight_bounds(edges, lw).unwrap()
    }

    #[test]
    fn json_layout() {
        let s = exact_stats(&path(3).unwrap(), 1, 1);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert!(v["entries"].as_array().unwrap()[0]["key"].is_string());
        assert_eq!(v["params"]["K"], serde_json::json!(s.params.k));
        let back: BallStatistics = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
