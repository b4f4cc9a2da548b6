//! One-round local rules and the partition-based estimators built on them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::{extract_ball_mapped, LabeledBall};
use crate::canon::{canonicalize, CanonicalBallKey};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::matching::maximum_matching;
use crate::mis::max_weight_independent_set;
use crate::oracles::decoration_bits;
use crate::partitions::{find_weighted_partition, PartitionCertificate};

pub const DEFAULT_BITS: u32 = 32;
/// Re-draw rounds used to break equal decorations within distance `2r`.
pub const MAX_REDRAW_ROUNDS: u32 = 3;
/// Largest component the estimators solve exactly.
pub const COMPONENT_CAP: usize = 256;

/// A manual: every vertex applies `decide` to its decorated `r`-ball.
/// `None` means the manual has no entry for the ball.
pub trait LocalRule: Sync {
    fn radius(&self) -> usize;
    fn bits_per_vertex(&self) -> u32;
    fn decide(&self, ball: &LabeledBall) -> Option<bool>;
}

/// A rule given by a closure over the decorated ball.
pub struct FnRule<F> {
    pub radius: usize,
    pub bits: u32,
    pub decide: F,
}

impl<F> LocalRule for FnRule<F>
where
    F: Fn(&LabeledBall) -> Option<bool> + Sync,
{
    fn radius(&self) -> usize {
        self.radius
    }
    fn bits_per_vertex(&self) -> u32 {
        self.bits
    }
    fn decide(&self, ball: &LabeledBall) -> Option<bool> {
        (self.decide)(ball)
    }
}

/// A finite decision table keyed by canonical decorated balls.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TableRule {
    pub radius: usize,
    pub bits: u32,
    pub table: BTreeMap<CanonicalBallKey, bool>,
}

impl LocalRule for TableRule {
    fn radius(&self) -> usize {
        self.radius
    }
    fn bits_per_vertex(&self) -> u32 {
        self.bits
    }
    fn decide(&self, ball: &LabeledBall) -> Option<bool> {
        self.table.get(&canonicalize(ball)).copied()
    }
}

/// Runs `rule` with the random bits of vertex `v` drawn from stream `v`.
pub fn run_local_rule<R: LocalRule + ?Sized>(
    g: &WeightedGraph,
    rule: &R,
    t: u32,
    seed: u64,
) -> Result<Vec<usize>> {
    let streams: Vec<u64> = (0..g.vertex_count() as u64).collect();
    run_local_rule_with_streams(g, rule, t, seed, &streams)
}

/// Like [`run_local_rule`] with an explicit RNG stream per vertex. Relabeling
/// the graph together with the streams relabels the output.
pub fn run_local_rule_with_streams<R: LocalRule + ?Sized>(
    g: &WeightedGraph,
    rule: &R,
    t: u32,
    seed: u64,
    streams: &[u64],
) -> Result<Vec<usize>> {
    let n = g.vertex_count();
    if streams.len() != n {
        return Err(Error::SizeMismatch(streams.len(), n));
    }
    let r = rule.radius();
    let bits = decorations(g, rule.bits_per_vertex(), 2 * r, seed, streams);
    let decisions: Vec<Option<bool>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let (ball, map) = extract_ball_mapped(g, v, r, t);
            let dec = map.iter().map(|&u| bits[u]).collect();
            rule.decide(&ball.with_decorations(dec))
        })
        .collect();
    let mut members = Vec::new();
    for (v, d) in decisions.into_iter().enumerate() {
        match d {
            Some(true) => members.push(v),
            Some(false) => {}
            None => return Err(Error::RuleIncomplete),
        }
    }
    Ok(members)
}

/// `k` bits per vertex; vertices sharing their bits with another vertex within
/// `reach` draw again, for at most [`MAX_REDRAW_ROUNDS`] rounds.
fn decorations(g: &WeightedGraph, k: u32, reach: usize, seed: u64, streams: &[u64]) -> Vec<u64> {
    let n = g.vertex_count();
    let mut bits: Vec<u64> = streams.iter().map(|&s| decoration_bits(seed, s, 0, k)).collect();
    if k == 0 || reach == 0 {
        return bits;
    }
    for round in 1..=MAX_REDRAW_ROUNDS {
        let clash: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|v| {
                extract_ball_mapped(g, v, reach, 0)
                    .1
                    .iter()
                    .skip(1)
                    .any(|&u| bits[u] == bits[v])
            })
            .collect();
        if !clash.iter().any(|&c| c) {
            break;
        }
        for v in 0..n {
            if clash[v] {
                bits[v] = decoration_bits(seed, streams[v], round, k);
            }
        }
    }
    bits
}

/// Output of [`local_independent_set`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalIndependentSet {
    pub members: Vec<usize>,
    /// `Σ_{v∈J} p(v)`.
    pub value: f64,
    pub certificate: Option<PartitionCertificate>,
    /// Set when no partition was found and the greedy fallback ran.
    pub warning: Option<String>,
}

impl LocalIndependentSet {
    pub fn is_fallback(&self) -> bool {
        self.warning.is_some()
    }
}

/// Independent set `J` with `i(G, p_G) − p(J) ≤ ε/2` whenever a partition at
/// `ε/2` with components of at most [`COMPONENT_CAP`] vertices exists: every
/// component is solved exactly and the removed vertices are left out.
/// Otherwise a random-rank greedy set is returned with a warning.
pub fn local_independent_set(g: &WeightedGraph, epsilon: f64, seed: u64) -> Result<LocalIndependentSet> {
    let adj = adjacency(g);
    let (members, certificate, warning) = match find_weighted_partition(g, epsilon / 2.0, Some(COMPONENT_CAP)) {
        Ok(cert) => {
            let mut keep = vec![true; g.vertex_count()];
            for &y in &cert.removed {
                keep[y] = false;
            }
            let sub: Vec<Vec<usize>> = adj
                .iter()
                .enumerate()
                .map(|(v, l)| if keep[v] { l.iter().copied().filter(|&w| keep[w]).collect() } else { Vec::new() })
                .collect();
            let weights: Vec<f64> = g
                .probabilities()
                .iter()
                .zip(&keep)
                .map(|(&p, &k)| if k { p } else { 0.0 })
                .collect();
            match max_weight_independent_set(&sub, &weights) {
                Ok(set) => (set.into_iter().filter(|&v| keep[v]).collect(), Some(cert), None),
                Err(e) => (greedy_independent_set(g, seed), Some(cert), Some(e.to_string())),
            }
        }
        Err(e) => (
            greedy_independent_set(g, seed),
            None,
            Some(Error::PartitionInfeasible(e.to_string()).to_string()),
        ),
    };
    assert!(members.iter().all(|&v| g.neighbors(v).iter().all(|w| members.binary_search(w).is_err())));
    Ok(LocalIndependentSet {
        value: g.mass(members.iter().copied()),
        members,
        certificate,
        warning,
    })
}

/// Vertices in increasing random rank join unless a neighbour already did.
fn greedy_independent_set(g: &WeightedGraph, seed: u64) -> Vec<usize> {
    let n = g.vertex_count();
    let mut order: Vec<(u64, usize)> = (0..n).map(|v| (decoration_bits(seed, v as u64, 0, 64), v)).collect();
    order.sort_unstable();
    let mut taken = vec![false; n];
    for (_, v) in order {
        if g.neighbors(v).iter().all(|&w| !taken[w]) {
            taken[v] = true;
        }
    }
    (0..n).filter(|&v| taken[v]).collect()
}

/// Output of [`estimate_matching`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchingEstimate {
    /// `Σ |M_i| / n`.
    pub value: f64,
    pub matching: Vec<(usize, usize)>,
    pub certificate: PartitionCertificate,
}

/// Maximum matchings inside the components of a partition at `ε/2`. The
/// estimate is deterministic; `seed` is accepted for interface symmetry.
pub fn estimate_matching(g: &WeightedGraph, epsilon: f64, _seed: u64) -> Result<MatchingEstimate> {
    let lw = g.log_weights();
    if lw.iter().any(|&x| (x - lw[0]).abs() > 1e-12) {
        return Err(Error::InvalidParameter("matching estimation needs uniform weights".into()));
    }
    let cert = find_weighted_partition(g, epsilon / 2.0, Some(COMPONENT_CAP))
        .map_err(|e| Error::PartitionInfeasible(e.to_string()))?;
    let n = g.vertex_count();
    let mut keep = vec![true; n];
    for &y in &cert.removed {
        keep[y] = false;
    }
    let sub: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if keep[v] {
                g.neighbors(v).iter().copied().filter(|&w| keep[w]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let mate = maximum_matching(&sub);
    let matching: Vec<(usize, usize)> = (0..n)
        .filter(|&v| mate[v] != usize::MAX && v < mate[v])
        .map(|v| (v, mate[v]))
        .collect();
    Ok(MatchingEstimate {
        value: matching.len() as f64 / n as f64,
        matching,
        certificate: cert,
    })
}

fn adjacency(g: &WeightedGraph) -> Vec<Vec<usize>> {
    (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect()
}
