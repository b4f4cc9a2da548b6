//! ACCEPT/REJECT testers: violation-mass testing through the Radon–Nikodym
//! oracle, and the deterministic observing test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ball::LabeledBall;
use crate::canon::canonicalize;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::oracles::{cycle_key, observe_cycles, OracleConfig, RnOracle};
use crate::partitions::tolerant_ceil;
use crate::properties::PropertySpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    Sampling,
    Observing,
}

/// One sampled ball (or observed graph class) and whether it violates `P`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub key: String,
    pub violating: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TesterParams {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub radius: usize,
    pub depth: u32,
    pub budget: usize,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub verdict: Verdict,
    pub mode: TestMode,
    pub property: PropertySpec,
    pub evidence: Vec<Evidence>,
    pub params: TesterParams,
}

impl TestVerdict {
    /// Re-runs the decision on the stored evidence.
    pub fn recompute(&self) -> Verdict {
        decide(&self.evidence, self.params.threshold)
    }
}

/// Radius, threshold and budget schedule; `None` picks the default for `ε`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TesterConfig {
    pub radius: Option<usize>,
    pub threshold: Option<f64>,
    pub budget: Option<usize>,
    pub depth: Option<u32>,
}

pub const DEFAULT_DEPTH: u32 = 3;
pub const MAX_DEFAULT_RADIUS: usize = 6;

/// `min(⌈4/ε⌉, 6)`.
pub fn default_radius(epsilon: f64) -> usize {
    tolerant_ceil(4.0 / epsilon).min(MAX_DEFAULT_RADIUS)
}

/// `ε/4`.
pub fn default_threshold(epsilon: f64) -> f64 {
    epsilon / 4.0
}

/// `⌈16/ε⌉` queries.
pub fn default_budget(epsilon: f64) -> usize {
    tolerant_ceil(16.0 / epsilon)
}

/// REJECT iff the violating fraction exceeds `threshold`.
pub fn decide(evidence: &[Evidence], threshold: f64) -> Verdict {
    if evidence.is_empty() {
        return Verdict::Accept;
    }
    let bad = evidence.iter().filter(|e| e.violating).count();
    if bad as f64 / evidence.len() as f64 > threshold {
        Verdict::Reject
    } else {
        Verdict::Accept
    }
}

/// Whether the ball itself, as an induced graph, violates `p`.
pub fn ball_violates(ball: &LabeledBall, p: &PropertySpec) -> Result<bool> {
    Ok(!p.holds(ball.vertex_count(), &ball.edges)?)
}

fn check_property(p: &PropertySpec) -> Result<()> {
    match p {
        PropertySpec::KColorable { .. } => Err(Error::UnsupportedProperty(format!(
            "no local violation test for {p}"
        ))),
        _ => Ok(()),
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Tests `p` with the default schedule.
pub fn test_property(
    g: &WeightedGraph,
    p: &PropertySpec,
    epsilon: f64,
    k: f64,
    seed: u64,
) -> Result<TestVerdict> {
    test_property_with(g, p, epsilon, k, seed, &TesterConfig::default())
}

/// Samples `budget` balls of radius `r` and rejects if more than a
/// `threshold` fraction contain a forbidden configuration. Members of `P`
/// never produce a violating ball, so they are always accepted.
pub fn test_property_with(
    g: &WeightedGraph,
    p: &PropertySpec,
    epsilon: f64,
    k: f64,
    seed: u64,
    cfg: &TesterConfig,
) -> Result<TestVerdict> {
    check_property(p)?;
    check_epsilon(epsilon)?;
    if g.ratio_bound() > k * (1.0 + 1e-9) {
        return Err(Error::ParamMismatch(format!(
            "graph needs ratio bound {} but K = {k}",
            g.ratio_bound()
        )));
    }
    let params = TesterParams {
        epsilon,
        k: Some(k),
        radius: cfg.radius.unwrap_or_else(|| default_radius(epsilon)),
        depth: cfg.depth.unwrap_or(DEFAULT_DEPTH),
        budget: cfg.budget.unwrap_or_else(|| default_budget(epsilon)),
        threshold: cfg.threshold.unwrap_or_else(|| default_threshold(epsilon)),
    };
    let oracle = RnOracle::new(g);
    let queries = oracle.run(&OracleConfig::new(params.radius, params.depth, params.budget, seed)?);
    let evidence = queries
        .par_iter()
        .map(|q| {
            Ok(Evidence {
                key: canonicalize(&q.ball).to_hex(),
                violating: ball_violates(&q.ball, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TestVerdict {
        verdict: decide(&evidence, params.threshold),
        mode: TestMode::Sampling,
        property: p.clone(),
        evidence,
        params,
    })
}

/// Deterministic test from the observed induced cycles of length up to
/// `s = ⌈2/ε⌉ + 1`: a forest must show none, a bipartite graph no odd one.
pub fn observable_test(g: &WeightedGraph, p: &PropertySpec, epsilon: f64) -> Result<TestVerdict> {
    check_epsilon(epsilon)?;
    let odd_only = match p {
        PropertySpec::Forest => false,
        PropertySpec::Bipartite => true,
        _ => {
            return Err(Error::UnsupportedProperty(format!(
                "observing test supports forest and bipartite, not {p}"
            )))
        }
    };
    let s = tolerant_ceil(2.0 / epsilon) + 1;
    let table = observe_cycles(g, s);
    let evidence: Vec<Evidence> = (3..=s)
        .map(|len| {
            let key = cycle_key(len);
            let seen = table.get(&key).unwrap_or(false);
            Evidence {
                key: key.to_hex(),
                violating: seen && (!odd_only || len % 2 == 1),
            }
        })
        .collect();
    let params = TesterParams {
        epsilon,
        k: None,
        radius: s,
        depth: 0,
        budget: 0,
        threshold: 0.0,
    };
    Ok(TestVerdict {
        verdict: decide(&evidence, params.threshold),
        mode: TestMode::Observing,
        property: p.clone(),
        evidence,
        params,
    })
}
